"""
Attackability test: eps*, its certificate and the initial attack parameter.
"""
