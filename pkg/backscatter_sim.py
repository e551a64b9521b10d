#!/usr/bin/env python3
"""
Ambient backscatter link simulator.

    python backscatter_sim.py sweep experiment.cfg --axis gamma_db --values 0,5,10 --out output/snr
    python backscatter_sim.py sweep --preset snr --plot
    python backscatter_sim.py analytic secomc-exact --sigma0 1 --sigma1 2 --n 1
    python backscatter_sim.py selftest
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
