"""
Victim bandit algorithms: LinUCB and Robust Phase Elimination.
"""
