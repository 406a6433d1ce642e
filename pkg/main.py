"""
foamkh entry point.

    python main.py compute "PD[X[1,4,2,5],X[3,6,4,1],X[5,2,6,3]]"
    python main.py verify --level fast
"""
import sys

from core.cli import main

if __name__ == "__main__":
    sys.exit(main())
