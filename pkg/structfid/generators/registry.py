"""
Lookup from generator kinds to their implementations.

Implementations register themselves at import time with the
``generator_registry.register(kind)`` class decorator.
"""

from typing import Callable, Dict, FrozenSet, Type

from ..exceptions import ConfigError
from .base import BaseGenerator, GeneratorKind


class GeneratorRegistry:
    def __init__(self):
        self._classes: Dict[GeneratorKind, Type[BaseGenerator]] = {}

    @staticmethod
    def _kind(kind) -> GeneratorKind:
        try:
            return GeneratorKind(kind)
        except ValueError as e:
            raise ConfigError(f"Unknown generator kind {kind!r}") from e

    def register(self, kind) -> Callable[[Type[BaseGenerator]], Type[BaseGenerator]]:
        """
        Class decorator binding ``kind`` to a BaseGenerator subclass.

        Raises:
            ConfigError: unknown kind, a class that is not a BaseGenerator, or a
                kind that already has a different implementation
        """
        kind = self._kind(kind)

        def decorator(generator_class):
            if not isinstance(generator_class, type) or not issubclass(
                generator_class, BaseGenerator
            ):
                raise ConfigError(f"{generator_class!r} is not a BaseGenerator subclass")
            current = self._classes.get(kind)
            if current is not None and current is not generator_class:
                raise ConfigError(f"{kind.value!r} is already bound to {current.__name__}")
            generator_class.generator_kind = kind
            self._classes[kind] = generator_class
            return generator_class

        return decorator

    def get(self, kind) -> Type[BaseGenerator]:
        """
        Raises:
            ConfigError: if no implementation is registered for ``kind``
        """
        kind = self._kind(kind)
        try:
            return self._classes[kind]
        except KeyError:
            raise ConfigError(f"No generator registered for {kind.value!r}") from None

    @property
    def kinds(self) -> FrozenSet[GeneratorKind]:
        return frozenset(self._classes)

    def __contains__(self, kind) -> bool:
        try:
            return self._kind(kind) in self._classes
        except ConfigError:
            return False


generator_registry = GeneratorRegistry()
