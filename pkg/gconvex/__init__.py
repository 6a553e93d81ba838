"""Decision toolkit for geodesic convexity of structured polynomials"""

__version__ = "1.0.0"
