"""
Weight Interface - Abstract base for weight families and their registry
"""
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Tuple, Type

import numpy as np


class IWeightFamily(ABC):
    """
    Abstract interface for weight families.

    A weight family turns a (params, support) pair into a quadrature rule
    for the measure dalpha(t) = w(t) dt on that support.

    Example:
        class MyWeight(IWeightFamily):
            family = "my_weight"

            def density(self, t):
                return np.ones_like(t)

            def rule(self, node_count):
                ...
                return nodes, weights, 2 * node_count - 1
    """

    # Class attributes - must be defined by subclasses
    family: str = ""
    aliases: Tuple[str, ...] = ()

    def __init__(self, params: Tuple[float, ...], support: Tuple[float, float]):
        """
        Initialize the family.

        Args:
            params: Family parameters (exponents, truncation, samples ...)
            support: Closed interval (lo, hi) carrying the weight
        """
        self.params = tuple(params)
        self.support = (float(support[0]), float(support[1]))

    @abstractmethod
    def density(self, t: np.ndarray) -> np.ndarray:
        """
        Evaluate the weight function w(t) on the support.

        Args:
            t: Points inside the support

        Returns:
            Weight values (same shape as t).
        """
        pass

    @abstractmethod
    def rule(self, node_count: int) -> Tuple[np.ndarray, np.ndarray, int]:
        """
        Build the quadrature rule.

        Args:
            node_count: Requested number of nodes

        Returns:
            (nodes, weights, degree_bound): nodes increasing inside the
            support, positive weights, and the polynomial degree up to
            which the rule is exact against the weight.
        """
        pass

    def validate(self) -> List[str]:
        """
        Check family-specific parameter constraints.

        Returns:
            List of problems (empty when valid).
        """
        return []

    @classmethod
    def default_support(cls, params: Tuple[float, ...]) -> Optional[Tuple[float, float]]:
        """
        Support implied by the params when none is given explicitly.

        Returns:
            (lo, hi) or None if the family needs an explicit support.
        """
        return None


class WeightRegistry:
    """
    Registry for weight family implementations.

    Example:
        WeightRegistry.register(LegendreWeight)
        family = WeightRegistry.get("legendre", (), (-1.0, 1.0))
    """

    _families: Dict[str, Type[IWeightFamily]] = {}
    _aliases: Dict[str, str] = {}

    @classmethod
    def register(cls, family_class: Type[IWeightFamily]) -> None:
        """
        Register a weight family class.

        Raises:
            ValueError: If class has no family name
        """
        name = getattr(family_class, 'family', None)
        if not name:
            raise ValueError(
                f"Weight class {family_class.__name__} must define 'family'"
            )
        cls._families[name] = family_class
        for alias in getattr(family_class, 'aliases', ()):
            cls._aliases[alias] = name

    @classmethod
    def unregister(cls, family: str) -> bool:
        """
        Unregister a family and its aliases.

        Returns:
            True if the family was registered and removed.
        """
        if family in cls._families:
            del cls._families[family]
            for alias in [a for a, n in cls._aliases.items() if n == family]:
                del cls._aliases[alias]
            return True
        return False

    @classmethod
    def canonical(cls, family: str) -> Optional[str]:
        """Resolve aliases; None when unknown."""
        if family in cls._families:
            return family
        return cls._aliases.get(family)

    @classmethod
    def get(cls, family: str, params: Tuple[float, ...],
            support: Tuple[float, float]) -> Optional[IWeightFamily]:
        """
        Get a family instance by name or alias.

        Returns:
            Family instance or None if not found.
        """
        name = cls.canonical(family)
        if name:
            return cls._families[name](params, support)
        return None

    @classmethod
    def get_class(cls, family: str) -> Optional[Type[IWeightFamily]]:
        name = cls.canonical(family)
        return cls._families.get(name) if name else None

    @classmethod
    def get_available(cls) -> list:
        """
        Get list of registered family names (aliases excluded).
        """
        return list(cls._families.keys())

    @classmethod
    def is_registered(cls, family: str) -> bool:
        return cls.canonical(family) is not None

    @classmethod
    def clear(cls) -> None:
        """
        Clear all registered families.
        Mainly for testing purposes.
        """
        cls._families.clear()
        cls._aliases.clear()
