"""
Spectral Averages - Interfaces Package
Abstract base classes for weight families and monic polynomial families.
"""
from .weight_interface import IWeightFamily, WeightRegistry
from .family_interface import MonicFamily

__all__ = [
    'IWeightFamily', 'WeightRegistry',
    'MonicFamily'
]
