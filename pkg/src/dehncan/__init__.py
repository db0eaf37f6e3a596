"""
Canonical decompositions of Dehn fillings of punctured-torus cusps.

Submodules
----------
farey      exact Farey-graph paths and L/R words
angles     angle-structure polytope of the layered solid torus
volume     Lobachevsky function and volume maximization
develop    cusp-link development and holonomy checks
canonical  Epstein-Penner convexity certificates
whitehead  fillings of the Whitehead link complement
cli        command-line front end
"""
__version__ = "0.1.0"
