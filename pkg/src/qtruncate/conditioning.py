"""Conditional detection on all ports but the first.

Setup convention: ancilla Fock states occupy input modes ``1..N-1``, the
signal enters mode ``N``; detectors sit on output modes ``2..N`` and the
heralded state leaves output mode ``1``. The profile coefficient

    c_n = <n, N_2, ..., N_N| U |n_1, ..., n_{N-1}, n>

multiplies the signal amplitude gamma_n in the heralded output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .circuit import Circuit, compile_circuit
from .evolution import evolve, matrix_element
from .fock import OccupationVector, SingleModeInput, StateVector, fidelity, make_input


class SumMismatch(ValueError):
    """Detected photon total differs from the ancilla photon total."""


@dataclass(frozen=True)
class DetectionPattern:
    """Photon counts required on ``measured_modes`` (1-based) to herald success."""

    counts: OccupationVector
    measured_modes: tuple = ()

    def __post_init__(self):
        counts = OccupationVector(self.counts)
        object.__setattr__(self, "counts", counts)
        modes = tuple(self.measured_modes) or tuple(range(2, len(counts) + 2))
        if len(modes) != len(counts):
            raise ValueError("one count per measured mode is required")
        if len(set(modes)) != len(modes):
            raise ValueError(f"measured modes {modes} are not distinct")
        object.__setattr__(self, "measured_modes", modes)

    @property
    def num_modes(self) -> int:
        return len(self.counts) + 1

    def output_mode(self, num_modes: int) -> int:
        free = sorted(set(range(1, num_modes + 1)) - set(self.measured_modes))
        if len(free) != 1 or any(not 1 <= m <= num_modes for m in self.measured_modes):
            raise ValueError(
                f"pattern on modes {self.measured_modes} must leave exactly one of "
                f"1..{num_modes} unmeasured"
            )
        return free[0]

    def total(self) -> int:
        return self.counts.total()


@dataclass(frozen=True)
class TargetPattern:
    """Which photon numbers 0..d-1 the device should keep (all others are holes)."""

    d: int
    kept: frozenset

    def __post_init__(self):
        kept = frozenset(int(k) for k in self.kept)
        object.__setattr__(self, "kept", kept)
        if self.d < 1:
            raise ValueError("target dimension must be >= 1")
        if not kept:
            raise ValueError("target must keep at least one Fock component")
        if any(not 0 <= k < self.d for k in kept):
            raise ValueError(f"kept indices {sorted(kept)} outside 0..{self.d - 1}")

    @classmethod
    def truncation(cls, d: int) -> "TargetPattern":
        return cls(d, frozenset(range(d)))

    @classmethod
    def punch(cls, d: int, holes: Iterable[int]) -> "TargetPattern":
        holes = set(holes)
        return cls(d, frozenset(set(range(d)) - holes))

    @classmethod
    def fock(cls, d: int, k: int) -> "TargetPattern":
        return cls(d, frozenset({k}))

    @property
    def holes(self) -> list[int]:
        return sorted(set(range(self.d)) - self.kept)

    def indicator(self) -> np.ndarray:
        return np.array([1.0 if n in self.kept else 0.0 for n in range(self.d)])

    def label(self) -> str:
        """Compact label such as ``01.3`` (dot marks a hole)."""
        return "".join(str(n) if n in self.kept else "." for n in range(self.d))


@dataclass(frozen=True, eq=False)
class TruncationProfile:
    d: int
    c: np.ndarray
    circuit: Circuit | None = None
    ancilla: OccupationVector | None = None
    detection: DetectionPattern | None = None

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))


def project(evolved: StateVector, pattern: DetectionPattern) -> tuple[StateVector, float]:
    """Condition ``evolved`` on the detector counts in ``pattern``.

    Returns the unnormalized single-mode state left on the unmeasured port
    and the heralding probability.
    """
    n_modes = evolved.num_modes
    out_mode = pattern.output_mode(n_modes) - 1
    measured = [m - 1 for m in pattern.measured_modes]
    reduced: dict = {}
    for occ, amp in evolved.items():
        if all(occ[m] == c for m, c in zip(measured, pattern.counts)):
            key = (occ[out_mode],)
            reduced[key] = reduced.get(key, 0j) + amp
    norm2 = evolved.norm2()
    state = StateVector(1, reduced)
    prob = state.norm2() / norm2 if norm2 > 0 else 0.0
    return state, prob


def _check_setup(circuit: Circuit, ancilla, detection: DetectionPattern):
    ancilla = OccupationVector(ancilla)
    n = circuit.num_modes
    if len(ancilla) != n - 1:
        raise ValueError(f"ancilla {tuple(ancilla)} must cover {n - 1} modes")
    if len(detection.counts) != n - 1:
        raise ValueError(f"detection {tuple(detection.counts)} must cover {n - 1} modes")
    detection.output_mode(n)
    if detection.total() != ancilla.total():
        raise SumMismatch(
            f"detected total {detection.total()} != ancilla total {ancilla.total()}"
        )
    return ancilla


def profile_coefficients(
    circuit: Circuit,
    ancilla,
    detection: DetectionPattern,
    photon_numbers: Iterable[int],
    method: str = "permanent",
    s: np.ndarray | None = None,
) -> np.ndarray:
    """c_n for arbitrary n; ``method`` is ``"permanent"`` or ``"evolve"``."""
    ancilla = _check_setup(circuit, ancilla, detection)
    n_modes = circuit.num_modes
    out_mode = detection.output_mode(n_modes) - 1
    photon_numbers = list(photon_numbers)

    def out_occ(n):
        occ = [0] * n_modes
        occ[out_mode] = n
        for m, c in zip(detection.measured_modes, detection.counts):
            occ[m - 1] = c
        return tuple(occ)

    if method == "permanent":
        s = compile_circuit(circuit) if s is None else s
        return np.array(
            [matrix_element(s, out_occ(n), tuple(ancilla) + (n,)) for n in photon_numbers],
            dtype=complex,
        )
    if method == "evolve":
        vals = []
        for n in photon_numbers:
            evolved = evolve(StateVector.fock(tuple(ancilla) + (n,)), circuit)
            vals.append(evolved[out_occ(n)])
        return np.array(vals, dtype=complex)
    raise ValueError(f"unknown method {method!r}")


def truncation_profile(
    circuit: Circuit,
    ancilla,
    detection: DetectionPattern,
    method: str = "permanent",
) -> TruncationProfile:
    """Profile c_0..c_{d-1} with d = (ancilla photon total) + 1.

    Raises :class:`SumMismatch` unless the detected total equals the
    ancilla total.
    """
    ancilla = _check_setup(circuit, ancilla, detection)
    d = ancilla.total() + 1
    c = profile_coefficients(circuit, ancilla, detection, range(d), method=method)
    return TruncationProfile(d, c, circuit, ancilla, detection)


def profile_fidelity(profile: TruncationProfile | np.ndarray, target: TargetPattern) -> float:
    """Overlap of the profile with the flat indicator of the kept components.

    Equals 1 exactly when ``c`` is a complex multiple of the indicator and
    is independent of the global phase and scale of ``c``.
    """
    c = np.asarray(profile.c if isinstance(profile, TruncationProfile) else profile)
    if len(c) != target.d:
        raise ValueError(f"profile has dimension {len(c)}, target {target.d}")
    norm2 = float(np.sum(np.abs(c) ** 2))
    if norm2 == 0:
        raise ValueError("zero profile: the detection pattern never heralds")
    overlap = abs(sum(c[n] for n in target.kept)) ** 2
    return min(1.0, overlap / (norm2 * len(target.kept)))


def aligned_deviation(profile: TruncationProfile | np.ndarray, target: TargetPattern) -> float:
    """max |c_n - e^{i theta} c_m| over kept n, m at the overlap-optimal phase.

    Written out as the spread of the phase-aligned kept coefficients plus
    the largest hole coefficient; zero iff the profile is ideal.
    """
    c = np.asarray(profile.c if isinstance(profile, TruncationProfile) else profile)
    kept = sorted(target.kept)
    total = sum(c[n] for n in kept)
    phase = np.exp(-1j * np.angle(total)) if total != 0 else 1.0
    aligned = c[kept] * phase
    spread = float(np.max(np.abs(aligned[:, None] - aligned[None, :])))
    holes = [abs(c[k]) for k in target.holes]
    return max(spread, max(holes, default=0.0))


def _normalized_gammas(signal: SingleModeInput) -> np.ndarray:
    g = signal.coefficients()
    return g / math.sqrt(float(np.sum(np.abs(g) ** 2)))


def success_probability(profile: TruncationProfile, signal: SingleModeInput) -> float:
    """Heralding probability sum_{n<d} |gamma_n c_n|^2.

    The signal is normalized over the components it actually carries, i.e.
    the same state :func:`make_input` builds, so this matches :func:`project`
    on the full simulation. Components n >= d are dropped; they herald
    nothing whenever output port 1 has no path from the signal port.
    """
    g = _normalized_gammas(signal)
    k = min(len(g), profile.d)
    return float(np.sum(np.abs(g[:k] * profile.c[:k]) ** 2))


def output_state(
    profile: TruncationProfile,
    signal: SingleModeInput,
    target: TargetPattern | None = None,
) -> tuple[StateVector, float]:
    """Heralded output (unnormalized, amplitudes gamma_n c_n) and its fidelity
    with the ideal truncated/punched signal sum_{n in kept} gamma_n |n>."""
    target = TargetPattern.truncation(profile.d) if target is None else target
    g = _normalized_gammas(signal)
    k = min(len(g), profile.d)
    amps = {(n,): g[n] * profile.c[n] for n in range(k) if g[n] * profile.c[n] != 0}
    state = StateVector(1, amps)
    if state.norm2() == 0:
        raise ValueError("heralding is impossible for this signal and profile")
    ideal = StateVector(1, {(n,): g[n] for n in sorted(target.kept) if n < k and g[n] != 0})
    if ideal.norm2() == 0:
        return state, 0.0
    return state, fidelity(state, ideal)


def herald(
    circuit: Circuit,
    ancilla,
    detection: DetectionPattern,
    signal: SingleModeInput,
) -> tuple[StateVector, float]:
    """Full simulation: build the input, evolve it, project on the pattern."""
    ancilla = OccupationVector(ancilla)
    state = make_input(signal, ancilla, circuit.num_modes)
    return project(evolve(state, circuit), detection)

