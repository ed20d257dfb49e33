"""Multi-mode bosonic Fock basis, sparse state vectors and input constructors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class OccupationVector(tuple):
    """Photon counts per mode, e.g. ``OccupationVector((1, 0, 2))``."""

    def __new__(cls, counts: Iterable[int] = ()):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative photon count in {counts}")
        return super().__new__(cls, counts)

    @property
    def num_modes(self) -> int:
        return len(self)

    def total(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return "|" + ",".join(str(c) for c in self) + ">"


def enumerate_basis(num_modes: int, total_photons: int) -> list[OccupationVector]:
    """All occupations of ``num_modes`` modes holding ``total_photons`` photons.

    The list is in ascending lexicographic order and has
    ``comb(total + num_modes - 1, num_modes - 1)`` entries.
    """
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    if total_photons < 0:
        raise ValueError("total_photons must be >= 0")

    out: list[OccupationVector] = []

    def rec(prefix: list[int], remaining: int, modes_left: int) -> None:
        if modes_left == 1:
            out.append(OccupationVector(prefix + [remaining]))
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, modes_left - 1)

    rec([], total_photons, num_modes)
    return out


@dataclass(frozen=True)
class StateVector:
    """Sparse, possibly unnormalized pure state over a fixed number of modes.

    Amplitudes are keyed by occupation. The normalization constant is never
    folded in; use :meth:`norm2` and :meth:`normalized` explicitly.
    """

    num_modes: int
    amplitudes: Mapping[OccupationVector, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_modes < 1:
            raise ValueError("num_modes must be positive")
        amps = {}
        for occ, amp in self.amplitudes.items():
            occ = occ if isinstance(occ, OccupationVector) else OccupationVector(occ)
            if len(occ) != self.num_modes:
                raise ValueError(f"occupation {occ} does not have {self.num_modes} modes")
            amps[occ] = complex(amp)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, counts: Sequence[int]) -> "StateVector":
        occ = OccupationVector(counts)
        return cls(len(occ), {occ: 1.0})

    def __getitem__(self, occ) -> complex:
        return self.amplitudes.get(OccupationVector(occ), 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def items(self):
        return self.amplitudes.items()

    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "StateVector":
        n2 = self.norm2()
        if n2 == 0:
            raise ValueError("cannot normalize a zero state")
        s = 1 / math.sqrt(n2)
        return StateVector(self.num_modes, {k: v * s for k, v in self.amplitudes.items()})

    def scaled(self, c: complex) -> "StateVector":
        return StateVector(self.num_modes, {k: v * c for k, v in self.amplitudes.items()})

    def pruned(self, threshold: float = 0.0) -> "StateVector":
        """Drop amplitudes with modulus <= ``threshold`` (exact zeros by default)."""
        return StateVector(
            self.num_modes,
            {k: v for k, v in self.amplitudes.items() if abs(v) > threshold},
        )

    def sectors(self) -> dict[int, "StateVector"]:
        """Split into fixed-photon-number components."""
        parts: dict[int, dict] = {}
        for occ, amp in self.amplitudes.items():
            parts.setdefault(occ.total(), {})[occ] = amp
        return {nu: StateVector(self.num_modes, amps) for nu, amps in sorted(parts.items())}

    def photon_numbers(self) -> set[int]:
        return {occ.total() for occ in self.amplitudes}

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.num_modes != self.num_modes:
            raise ValueError("mode count mismatch")
        small, big = (self, other) if len(self) <= len(other) else (other, self)
        s = sum(a.conjugate() * big.amplitudes.get(k, 0j) for k, a in small.amplitudes.items())
        return s if small is self else s.conjugate()

    def coefficients(self, size: int | None = None) -> np.ndarray:
        """Dense coefficient vector of a single-mode state."""
        if self.num_modes != 1:
            raise ValueError("coefficients() is defined for single-mode states only")
        top = max((occ[0] for occ in self.amplitudes), default=-1)
        size = top + 1 if size is None else size
        vec = np.zeros(size, dtype=complex)
        for occ, amp in self.amplitudes.items():
            if occ[0] < size:
                vec[occ[0]] = amp
        return vec


def default_cutoff(alpha: complex) -> int:
    a = abs(alpha)
    return max(20, math.ceil(a * a + 6 * a + 10))


@dataclass(frozen=True)
class SingleModeInput:
    """Signal state fed to one interferometer port.

    Build with :meth:`fock`, :meth:`coherent` or :meth:`custom`.
    """

    kind: str
    k: int = 0
    alpha: complex = 0j
    cutoff: int = 0
    gammas: tuple = ()

    @classmethod
    def fock(cls, k: int) -> "SingleModeInput":
        if k < 0:
            raise ValueError("Fock index must be >= 0")
        return cls("fock", k=int(k), cutoff=int(k))

    @classmethod
    def coherent(cls, alpha: complex, cutoff: int | None = None) -> "SingleModeInput":
        cutoff = default_cutoff(alpha) if cutoff is None else int(cutoff)
        if cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        return cls("coherent", alpha=complex(alpha), cutoff=cutoff)

    @classmethod
    def custom(cls, gammas: Sequence[complex]) -> "SingleModeInput":
        gammas = tuple(complex(g) for g in gammas)
        if not any(g != 0 for g in gammas):
            raise ValueError("custom signal needs at least one nonzero coefficient")
        return cls("custom", cutoff=len(gammas) - 1, gammas=gammas)

    def coefficients(self) -> np.ndarray:
        """gamma_0 .. gamma_cutoff (coherent values are the exact, untruncated ones)."""
        if self.kind == "fock":
            vec = np.zeros(self.k + 1, dtype=complex)
            vec[self.k] = 1
            return vec
        if self.kind == "coherent":
            n = np.arange(self.cutoff + 1)
            # log-space to stay finite for large cutoffs
            log_mag = -abs(self.alpha) ** 2 / 2 - 0.5 * np.array([math.lgamma(k + 1) for k in n])
            if self.alpha == 0:
                vec = np.zeros(self.cutoff + 1, dtype=complex)
                vec[0] = 1
                return vec
            log_mag = log_mag + n * math.log(abs(self.alpha))
            phase = np.exp(1j * n * np.angle(self.alpha))
            return np.exp(log_mag) * phase
        if self.kind == "custom":
            return np.array(self.gammas, dtype=complex)
        raise ValueError(f"unknown signal kind {self.kind!r}")

    def tail_mass(self) -> float:
        """Probability weight beyond the cutoff (nonzero only for coherent signals)."""
        if self.kind != "coherent":
            return 0.0
        x = abs(self.alpha) ** 2
        if x == 0:
            return 0.0
        # Regularized upper tail of the Poisson(|alpha|^2) distribution.
        from scipy.stats import poisson

        return float(poisson.sf(self.cutoff, x))

    def state(self) -> StateVector:
        return StateVector(1, {(n,): g for n, g in enumerate(self.coefficients()) if g != 0})


def make_input(
    signal: SingleModeInput, ancilla: Sequence[int], signal_mode_index: int
) -> StateVector:
    """Product state of Fock ancillae with ``signal`` on one port.

    ``signal_mode_index`` is 1-based; the ancilla counts fill the remaining
    modes in order.
    """
    ancilla = list(OccupationVector(ancilla))
    num_modes = len(ancilla) + 1
    if not 1 <= signal_mode_index <= num_modes:
        raise IndexError(f"signal mode {signal_mode_index} outside 1..{num_modes}")
    gammas = signal.coefficients()
    if not np.any(gammas != 0):
        raise ValueError("empty signal")
    pos = signal_mode_index - 1
    amps = {}
    for n, g in enumerate(gammas):
        if g != 0:
            amps[OccupationVector(ancilla[:pos] + [n] + ancilla[pos:])] = g
    return StateVector(num_modes, amps)


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 / (<a|a><b|b>) for two pure, possibly unnormalized states."""
    na, nb = a.norm2(), b.norm2()
    if na == 0 or nb == 0:
        raise ValueError("fidelity of a zero-norm state is undefined")
    f = abs(a.inner(b)) ** 2 / (na * nb)
    return min(1.0, max(0.0, f))
