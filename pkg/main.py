#!/usr/bin/env python3
"""
Unified Entrypoint for the Attack Lab

Certifies attackability of linear bandit instances and runs reward-poisoning
campaigns against LinUCB and RobustPhE.

Usage:
    python main.py check fixtures/blocked_target.json --allow-unnormalized
    python main.py run --victim linucb --attack two-stage --T 10000 --seed 7
    python main.py --help

External dependencies: numpy, scipy, pandas, tabulate, python-dotenv
"""
import os
import sys

# Get the project root directory
PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))

# Ensure Python can find the src module
sys.path.append(PROJECT_ROOT)

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
