"""Beam-splitter / phase-shifter networks and their scattering matrices.

Modes are 1-based everywhere in the public API. A compiled matrix ``S``
maps input to output annihilation operators, ``b = S a``; equivalently a
creation operator on input mode ``x`` becomes ``sum_j S[j, x] b_j^dagger``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .literals import parse_number

TWO_PI = 2 * math.pi


class CircuitError(ValueError):
    """Invalid circuit description or parameters."""


@dataclass(frozen=True)
class BeamSplitter:
    """Real beam splitter ``[[t, r], [-r, t]]`` acting on ``(mode_a, mode_b)``."""

    mode_a: int
    mode_b: int
    t2: float
    label: str = ""

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise CircuitError(f"beam splitter needs two distinct modes, got {self.mode_a}")
        if not (0.0 <= self.t2 <= 1.0) or math.isnan(self.t2):
            raise CircuitError(f"transmittance {self.t2} outside [0, 1]")

    @property
    def modes(self) -> tuple[int, int]:
        return (self.mode_a, self.mode_b)

    @property
    def t(self) -> float:
        return math.sqrt(self.t2)

    @property
    def r(self) -> float:
        return math.sqrt(1.0 - self.t2)

    def block(self) -> np.ndarray:
        t, r = self.t, self.r
        return np.array([[t, r], [-r, t]], dtype=complex)


@dataclass(frozen=True)
class PhaseShifter:
    """Phase ``exp(i xi)`` on one mode."""

    mode: int
    xi: float
    label: str = ""

    def __post_init__(self):
        if not math.isfinite(self.xi):
            raise CircuitError(f"phase {self.xi} is not finite")
        object.__setattr__(self, "xi", float(self.xi) % TWO_PI)

    @property
    def modes(self) -> tuple[int]:
        return (self.mode,)


Element = Union[BeamSplitter, PhaseShifter]


@dataclass(frozen=True)
class Circuit:
    """Elements applied first to last on ``num_modes`` modes."""

    num_modes: int
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_modes < 1:
            raise CircuitError("a circuit needs at least one mode")
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            for m in el.modes:
                if not 1 <= m <= self.num_modes:
                    raise CircuitError(f"{el} uses mode {m} outside 1..{self.num_modes}")

    def compile(self) -> np.ndarray:
        return compile_circuit(self)

    def element(self, label: str) -> Element:
        for el in self.elements:
            if el.label == label:
                return el
        raise KeyError(label)

    def without(self, labels: Sequence[str]) -> "Circuit":
        return Circuit(self.num_modes, tuple(e for e in self.elements if e.label not in labels))

    def to_dict(self) -> dict:
        out = []
        for el in self.elements:
            if isinstance(el, BeamSplitter):
                d = {"type": "bs", "modes": [el.mode_a, el.mode_b], "t2": el.t2}
            else:
                d = {"type": "ps", "mode": el.mode, "xi": el.xi}
            if el.label:
                d["label"] = el.label
            out.append(d)
        return {"modes": self.num_modes, "elements": out}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def element_matrix(el: Element, num_modes: int) -> np.ndarray:
    mat = np.eye(num_modes, dtype=complex)
    if isinstance(el, BeamSplitter):
        idx = np.array([el.mode_a - 1, el.mode_b - 1])
        mat[np.ix_(idx, idx)] = el.block()
    else:
        mat[el.mode - 1, el.mode - 1] = np.exp(1j * el.xi)
    return mat


def compile_circuit(circuit: Circuit) -> np.ndarray:
    """Scattering matrix: product of element matrices, last element leftmost."""
    s = np.eye(circuit.num_modes, dtype=complex)
    for el in circuit.elements:
        s = element_matrix(el, circuit.num_modes) @ s
    return s


def unitarity_error(s: np.ndarray) -> float:
    return float(np.max(np.abs(s.conj().T @ s - np.eye(len(s)))))


# ---------------------------------------------------------------------------
# Presets
#
# An eight-port wiring lists, for B1..B5 in application order, the ordered
# mode pair of the beam splitter and the mode phased by P_i just before it.
# Every wiring keeps output mode 1 out of reach of input mode 4 (the apex
# beam splitter is absent), so S[0, 3] == 0 identically.


@dataclass(frozen=True)
class Wiring:
    name: str
    pairs: tuple  # five (a, b) tuples
    phase_modes: tuple  # five mode indices
    note: str = ""


WIRINGS: dict[str, Wiring] = {}


def _register(w: Wiring) -> None:
    WIRINGS[w.name] = w


_register(
    Wiring(
        "qsd8",
        pairs=((1, 2), (1, 3), (2, 3), (2, 4), (3, 4)),
        phase_modes=(2, 3, 3, 4, 4),
        note="canonical L0 wiring",
    )
)
_register(
    Wiring(
        "qsd8-alt-1",
        pairs=((1, 2), (1, 3), (2, 3), (2, 4), (3, 4)),
        phase_modes=(2, 3, 3, 2, 4),
        note="L0 with P4 on the ancilla arm (mode 2)",
    )
)
_register(
    Wiring(
        "qsd8-alt-2",
        pairs=((1, 2), (1, 3), (3, 4), (2, 4), (2, 3)),
        phase_modes=(2, 3, 4, 4, 3),
        note="L0 with the (2,3) and (3,4) couplers of B3 and B5 exchanged",
    )
)
_register(
    Wiring(
        "qsd8-alt-3",
        pairs=((1, 2), (1, 3), (2, 3), (2, 4), (3, 4)),
        phase_modes=(1, 1, 2, 2, 3),
        note="L0 with every P_i on the lower-indexed mode of B_i",
    )
)

QSD6_PAIRS = ((1, 2), (2, 3))
QSD6_PHASE_MODES = (2, 3)


def preset_names() -> list[str]:
    return ["qsd6", *WIRINGS]


def preset_arity(name: str) -> int:
    if name == "qsd6":
        return 2
    if name in WIRINGS:
        return 5
    raise CircuitError(f"unknown preset {name!r}; known: {', '.join(preset_names())}")


def preset(name: str, t2: Sequence, xi: Sequence | None = None) -> Circuit:
    """Six-port or eight-port scissors circuit with the given parameters.

    ``qsd6`` takes ``t2 = [t1^2, t4^2]`` and ``xi = [xi1, xi4]`` on modes
    (1, 2, 3) with the signal on mode 3. Eight-port presets take five
    transmittances and five phases; the output phase shifter is omitted.
    Entries may be literals such as ``"pi/2"``.
    """
    arity = preset_arity(name)
    t2 = [parse_number(v) for v in t2]
    xi = [0.0] * arity if xi is None else [parse_number(v) for v in xi]
    if len(t2) != arity or len(xi) != arity:
        raise CircuitError(
            f"preset {name} expects {arity} transmittances and {arity} phases, "
            f"got {len(t2)} and {len(xi)}"
        )
    if name == "qsd6":
        numbers, pairs, phase_modes, modes = (1, 4), QSD6_PAIRS, QSD6_PHASE_MODES, 3
    else:
        w = WIRINGS[name]
        numbers, pairs, phase_modes, modes = (1, 2, 3, 4, 5), w.pairs, w.phase_modes, 4
    elements = []
    for i, (a, b), pm, tt, x in zip(numbers, pairs, phase_modes, t2, xi):
        elements.append(PhaseShifter(pm, x, label=f"P{i}"))
        elements.append(BeamSplitter(a, b, tt, label=f"B{i}"))
    return Circuit(modes, tuple(elements))


# ---------------------------------------------------------------------------
# JSON circuit files


def circuit_from_dict(data: dict) -> Circuit:
    """Parse either an explicit element list or a preset reference.

    Explicit: ``{"modes": N, "elements": [{"type": "bs", "modes": [a, b],
    "t2": x}, {"type": "ps", "mode": m, "xi": x}, ...]}``.
    Preset: ``{"preset": "qsd8", "t2": [...], "xi": [...]}``.
    """
    if not isinstance(data, dict):
        raise CircuitError("circuit description must be a JSON object")
    if "preset" in data:
        if "t2" not in data:
            raise CircuitError("preset circuit needs a 't2' array")
        return preset(data["preset"], data["t2"], data.get("xi"))
    if "modes" not in data or "elements" not in data:
        raise CircuitError("circuit needs 'modes' and 'elements' fields")
    modes = data["modes"]
    if not isinstance(modes, int) or isinstance(modes, bool):
        raise CircuitError("'modes' must be an integer")
    elements = []
    for i, spec in enumerate(data["elements"]):
        where = f"elements[{i}]"
        if not isinstance(spec, dict) or "type" not in spec:
            raise CircuitError(f"{where}: expected an object with a 'type' field")
        label = str(spec.get("label", ""))
        try:
            if spec["type"] == "bs":
                a, b = spec["modes"]
                elements.append(BeamSplitter(int(a), int(b), parse_number(spec["t2"]), label))
            elif spec["type"] == "ps":
                elements.append(PhaseShifter(int(spec["mode"]), parse_number(spec["xi"]), label))
            else:
                raise CircuitError(f"unknown element type {spec['type']!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise CircuitError(f"{where}: {exc}") from exc
    return Circuit(modes, tuple(elements))


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    return circuit_from_dict(data)
