"""
Linear bandit environments: model, random samplers and instance files.
"""
