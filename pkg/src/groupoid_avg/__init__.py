"""
Averaging toolkit for pseudo-representations of finite groupoids.

Finite groupoids play the role of proper groupoids: every target fiber is a
finite set, so Haar integrals are weighted sums and the averaging operator
(the mean ratio) and its iterates can be evaluated exactly and certified.
"""

__version__ = "0.1.0"
