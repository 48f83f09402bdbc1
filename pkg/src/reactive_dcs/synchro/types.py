"""Flow types and runtime values.

Values are plain Python objects: ``bool`` for booleans, ``int`` for integers
and ``str`` for enumeration symbols.
"""
from __future__ import annotations

from dataclasses import dataclass

INT_MAX = 2**31 - 1
INT_MIN = -(2**31 - 1)


@dataclass(frozen=True)
class BoolType:
    def __str__(self):
        return "bool"


@dataclass(frozen=True)
class IntType:
    def __str__(self):
        return "int"


@dataclass(frozen=True)
class EnumType:
    name: str
    symbols: tuple

    def __str__(self):
        return self.name


BOOL = BoolType()
INT = IntType()
PEID = EnumType("peid", ("pe0", "pe1", "pe2", "pe3"))

BUILTIN_ENUMS = {PEID.name: PEID}


def saturate(n: int) -> int:
    if n > INT_MAX:
        return INT_MAX
    if n < INT_MIN:
        return INT_MIN
    return n


def type_of_value(value, enums=()):
    """Return the type of a runtime value; enum symbols are looked up in `enums`."""
    if isinstance(value, bool):
        return BOOL
    if isinstance(value, int):
        return INT
    if isinstance(value, str):
        for enum in enums:
            if value in enum.symbols:
                return enum
        return None
    return None


def check_value(value, typ) -> bool:
    if isinstance(typ, BoolType):
        return isinstance(value, bool)
    if isinstance(typ, IntType):
        return isinstance(value, int) and not isinstance(value, bool) and INT_MIN <= value <= INT_MAX
    if isinstance(typ, EnumType):
        return isinstance(value, str) and value in typ.symbols
    return False


def domain(typ):
    """Finite value domain of a type, or None for integers."""
    if isinstance(typ, BoolType):
        return (False, True)
    if isinstance(typ, EnumType):
        return typ.symbols
    return None


def default_value(typ):
    if isinstance(typ, BoolType):
        return False
    if isinstance(typ, IntType):
        return 0
    return typ.symbols[0]


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)
