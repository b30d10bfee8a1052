"""
Attack Lab - Reward-poisoning attacks on linear stochastic bandits.
"""

__version__ = '1.0.0'
