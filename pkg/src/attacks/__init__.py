"""
Reward-poisoning adversaries that sit between the environment and the learner.
"""
