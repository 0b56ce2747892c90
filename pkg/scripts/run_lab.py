"""
KGS Lab — Experiment Runner
============================
Entry point for simulations, contraction experiments, exponent algebra,
region data, estimate checks and sweeps.

Usage:
    python -m scripts.run_lab simulate --m 1 --grid-points 256 --domain-length 50 --dt 1e-3 --T 10
    python -m scripts.run_lab picard --c-local 2 --out runs/picard
    python -m scripts.run_lab region --m-values 1,3/2,19/10,2
    python -m scripts.run_lab exponents --m 3/2 --epsilon 1/10
    python -m scripts.run_lab check-estimates --estimate schrodinger_interpolated --q 6 --r 6 --b 0.6
    python -m scripts.run_lab sweep --lambdas 1,2,4 --m-values 1,3/2 --workers 4
"""

import logging
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config.settings import get_settings
from src.harness.cli import main

BANNER = """
╔═══════════════════════════════════════════════════════╗
║                       KGS Lab                         ║
║    Klein–Gordon–Schrödinger • Yukawa coupling |u|^2m  ║
╚═══════════════════════════════════════════════════════╝
"""

logging.basicConfig(
    level=getattr(logging, get_settings().log_level),
    format="%(asctime)s | %(name)s | %(levelname)s | %(message)s",
)
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    print(BANNER)
    sys.exit(main())
