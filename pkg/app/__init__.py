"""
Elastica knots: closed elastic curves from Weierstrass and Jacobi elliptic solutions.
"""
