"""
Core Derived Representation Module

Modular architecture for derived representation schemes: presentations,
matrix reduction, block homology, cyclic complexes and trace maps.
"""

from .engine import DRepEngine

# Public API
__all__ = [
    'DRepEngine',
]

__version__ = "1.0.0"
