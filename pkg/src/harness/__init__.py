"""
Campaigns, monitors, experiments and result files.
"""
