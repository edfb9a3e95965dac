"""
gridopt - Optimisation de réseaux de distribution

Prévision de charge, reconfiguration, OPF déséquilibré, modélisation
des incertitudes et planification sous contraintes en chance.
"""

__version__ = "1.0.0"
