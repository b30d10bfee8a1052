"""
Utility functions shared across the Attack Lab application.
"""
