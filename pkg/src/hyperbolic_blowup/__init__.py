"""
Hyperbolic blow-up - characteristic solver for the hyperbolic Boussinesq system
"""
