"""Known parameter solutions for the six-port and eight-port devices.

Parameters are kept as exact literal strings and evaluated once in double
precision, so each entry can be compared against its closed form by eye.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, preset
from .conditioning import DetectionPattern, TargetPattern
from .fock import OccupationVector
from .literals import parse_number


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    family: str  # "qsd6" or "qsd8" (any eight-port wiring)
    ancilla: OccupationVector
    detection: OccupationVector
    t2_literals: tuple
    xi_literals: tuple
    target: TargetPattern
    source: str

    @property
    def t2(self) -> list[float]:
        return [parse_number(v) for v in self.t2_literals]

    @property
    def xi(self) -> list[float]:
        return [parse_number(v) for v in self.xi_literals]

    @property
    def detection_pattern(self) -> DetectionPattern:
        return DetectionPattern(self.detection)

    def circuit(self, wiring: str | None = None) -> Circuit:
        name = self.family if wiring is None else wiring
        if self.family == "qsd6" and name != "qsd6":
            raise ValueError(f"{self.name} is a six-port entry; wiring {name!r} does not apply")
        if self.family == "qsd8" and name == "qsd6":
            raise ValueError(f"{self.name} is an eight-port entry")
        return preset(name, self.t2, self.xi)


def _entry(name, family, ancilla, detection, t2, xi, target, source):
    return CatalogEntry(
        name,
        family,
        OccupationVector(ancilla),
        OccupationVector(detection),
        tuple(t2),
        tuple(xi),
        target,
        source,
    )


_ZERO5 = ("0",) * 5
_T_PLUS = "(3+sqrt(3))/6"
_T_MINUS = "(3-sqrt(3))/6"

_CATALOG = (
    _entry(
        "d2", "qsd6", (1, 0), (1, 0),
        ("1/2", "1/2"), ("0", "pi"),
        TargetPattern.truncation(2),
        "six-port scissors, d=2, highest-probability point",
    ),
    _entry(
        "d3-sol1", "qsd6", (1, 1), (1, 1),
        (_T_MINUS, _T_MINUS), ("0", "0"),
        TargetPattern.truncation(3),
        "six-port scissors, d=3, xi4=0 branch",
    ),
    _entry(
        "d3-sol2", "qsd6", (1, 1), (1, 1),
        (_T_PLUS, _T_PLUS), ("0", "0"),
        TargetPattern.truncation(3),
        "six-port scissors, d=3, xi4=0 branch",
    ),
    _entry(
        "d3-sol3", "qsd6", (1, 1), (1, 1),
        (_T_MINUS, _T_PLUS), ("0", "pi"),
        TargetPattern.truncation(3),
        "six-port scissors, d=3, xi4=pi branch",
    ),
    _entry(
        "d3-sol4", "qsd6", (1, 1), (1, 1),
        (_T_PLUS, _T_MINUS), ("0", "pi"),
        TargetPattern.truncation(3),
        "six-port scissors, d=3, xi4=pi branch",
    ),
    _entry(
        "d4-simple", "qsd8", (1, 1, 1), (1, 1, 1),
        ("1/3", "1/4", "1", "1/3", "1/2"), ("0", "0", "0", "0", "pi/2"),
        TargetPattern.truncation(4),
        "eight-port scissors, d=4, simple closed form",
    ),
    _entry(
        "d5-numeric", "qsd8", (1, 2, 1), (1, 2, 1),
        ("0.305", "0.388", "1", "0.817", "0.184"), ("0", "0", "0", "pi", "0"),
        TargetPattern.truncation(5),
        "eight-port scissors, d=5, numerical solution quoted to 3 digits",
    ),
    _entry(
        "punch-01x3", "qsd8", (1, 1, 1), (1, 1, 1),
        ("(7+sqrt(21))/14", "1/3", "1", "1/2", "(5-sqrt(5))/10"), _ZERO5,
        TargetPattern.punch(4, [2]),
        "eight-port punching, hole at |2>",
    ),
    _entry(
        "punch-x123", "qsd8", (1, 1, 1), (1, 1, 1),
        ("(7+sqrt(21))/14", "1/3", "1", "1/2", "(2-sqrt(2))/4"), _ZERO5,
        TargetPattern.punch(4, [0]),
        "eight-port punching, hole at |0>",
    ),
    _entry(
        "punch-0x2x", "qsd8", (1, 1, 1), (1, 1, 1),
        ("1", "1/2", "1", "1", "1/2"), _ZERO5,
        TargetPattern.punch(4, [1, 3]),
        "eight-port two-component superposition |0>,|2>",
    ),
    _entry(
        "punch-x1x3", "qsd8", (1, 1, 1), (1, 1, 1),
        ("1/2", "(3-sqrt(3))/3", "1", "(3-sqrt(3))/3", "1/2"), _ZERO5,
        TargetPattern.punch(4, [0, 2]),
        "eight-port two-component superposition |1>,|3>",
    ),
    _entry(
        "punch-0xx3", "qsd8", (1, 1, 1), (1, 1, 1),
        ("(1-sqrt(5/133))/2", "1/2", "1", "1/6", "(1+3*sqrt(3/155))/2"), _ZERO5,
        TargetPattern.punch(4, [1, 2]),
        "eight-port two-component superposition |0>,|3>",
    ),
    _entry(
        "fock-2", "qsd8", (1, 1, 1), (1, 1, 1),
        ("1", "1/2", "1/3", "1/2", "1"), _ZERO5,
        TargetPattern.fock(4, 2),
        "eight-port Fock-state synthesis of |2>",
    ),
    _entry(
        "fock-3", "qsd8", (1, 1, 1), (1, 1, 1),
        ("1/2", "1/2", "1", "1/2", "1/2"), ("0", "0", "0", "0", "pi/2"),
        TargetPattern.fock(4, 3),
        "eight-port Fock-state synthesis of |3>",
    ),
)


def catalog() -> list[CatalogEntry]:
    return list(_CATALOG)


def get_entry(name: str) -> CatalogEntry:
    for entry in _CATALOG:
        if entry.name == name:
            return entry
    raise KeyError(f"unknown catalog entry {name!r}")
