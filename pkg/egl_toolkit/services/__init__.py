"""
Numerical services: special functions, distributions, estimation, goodness of fit.
"""
