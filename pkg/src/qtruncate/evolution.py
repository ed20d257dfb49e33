"""Fock-space evolution through linear-optical circuits.

Two independent routes are provided. :func:`evolve` applies elements one at
a time to a sparse state (production path). :func:`matrix_element` computes
``<m|U|n>`` directly from the scattering matrix as a permanent of the
matrix with repeated rows and columns (oracle path).
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import Circuit, Element, PhaseShifter
from .fock import OccupationVector, StateVector


# ---------------------------------------------------------------------------
# Sequential engine


@lru_cache(maxsize=4096)
def _bs_transfer(t: float, r: float, mp: int, mq: int) -> tuple:
    """Output (k, amplitude) pairs for |mp, mq> through one beam splitter.

    ``a_p^+ -> t b_p^+ - r b_q^+`` and ``a_q^+ -> r b_p^+ + t b_q^+``;
    ``k`` is the photon count left on mode p.
    """
    total = mp + mq
    coeff = [0.0] * (total + 1)
    for i in range(mp + 1):
        ci = math.comb(mp, i) * t**i * (-r) ** (mp - i)
        if ci == 0:
            continue
        for j in range(mq + 1):
            cj = math.comb(mq, j) * r**j * t ** (mq - j)
            if cj != 0:
                coeff[i + j] += ci * cj
    norm_in = math.sqrt(math.factorial(mp) * math.factorial(mq))
    out = []
    for k, c in enumerate(coeff):
        if c != 0:
            out.append((k, c * math.sqrt(math.factorial(k) * math.factorial(total - k)) / norm_in))
    return tuple(out)


def apply_element(state: StateVector, element: Element) -> StateVector:
    """Apply a single beam splitter or phase shifter to a Fock-space state."""
    for m in element.modes:
        if not 1 <= m <= state.num_modes:
            raise IndexError(f"element mode {m} outside 1..{state.num_modes}")

    if isinstance(element, PhaseShifter):
        p = element.mode - 1
        phase = np.exp(1j * element.xi)
        return StateVector(
            state.num_modes,
            {occ: amp * phase ** occ[p] for occ, amp in state.amplitudes.items()},
        )

    p, q = element.mode_a - 1, element.mode_b - 1
    t, r = element.t, element.r
    out: dict[OccupationVector, complex] = {}
    for occ, amp in state.amplitudes.items():
        mp, mq = occ[p], occ[q]
        total = mp + mq
        counts = list(occ)
        for k, c in _bs_transfer(t, r, mp, mq):
            counts[p], counts[q] = k, total - k
            key = OccupationVector(counts)
            out[key] = out.get(key, 0j) + amp * c
    return StateVector(state.num_modes, out)


def evolve(state: StateVector, circuit: Circuit) -> StateVector:
    """Propagate ``state`` through ``circuit`` element by element.

    Photon-number sectors never mix, so mixed-sector inputs (truncated
    coherent states) are simply carried along in one sparse map.
    """
    if state.num_modes != circuit.num_modes:
        raise ValueError(
            f"state has {state.num_modes} modes, circuit has {circuit.num_modes}"
        )
    for el in circuit.elements:
        state = apply_element(state, el)
    return state


# ---------------------------------------------------------------------------
# Permanent engine


def permanent(m) -> complex:
    """Permanent via Ryser's formula visited in Gray-code order, O(2^n n)."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {m.shape}")
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    cols = [m[:, j] for j in range(n)]
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    sign = -1.0 if n % 2 else 1.0  # (-1)^(n - |subset|), subset starts empty
    in_set = [False] * n
    for g in range(1, 2**n):
        j = (g & -g).bit_length() - 1  # bit flipped between gray(g-1) and gray(g)
        if in_set[j]:
            row_sums -= cols[j]
        else:
            row_sums += cols[j]
        in_set[j] = not in_set[j]
        sign = -sign
        total += sign * np.prod(row_sums)
    return complex(total)


def repeated_index_matrix(
    s: np.ndarray, out_occ: Sequence[int], in_occ: Sequence[int]
) -> np.ndarray:
    """``S[out|in]``: row i repeated out_occ[i] times, column j in_occ[j] times."""
    rows = np.repeat(np.arange(len(out_occ)), out_occ)
    cols = np.repeat(np.arange(len(in_occ)), in_occ)
    return s[np.ix_(rows, cols)]


def matrix_element(s: np.ndarray, out_occ: Sequence[int], in_occ: Sequence[int]) -> complex:
    """<out|U|in> for the Fock-space unitary induced by scattering matrix ``s``."""
    s = np.asarray(s)
    n_modes = s.shape[0]
    if len(out_occ) != n_modes or len(in_occ) != n_modes:
        raise ValueError(
            f"occupations {tuple(out_occ)}, {tuple(in_occ)} do not match {n_modes} modes"
        )
    if sum(out_occ) != sum(in_occ):
        return 0j
    norm = math.prod(math.factorial(k) for k in out_occ) * math.prod(
        math.factorial(k) for k in in_occ
    )
    return permanent(repeated_index_matrix(s, out_occ, in_occ)) / math.sqrt(norm)


def evolve_by_permanents(state: StateVector, s: np.ndarray) -> StateVector:
    """Full output state from matrix elements; exponential cost, for checks only."""
    from .fock import enumerate_basis

    n_modes = s.shape[0]
    out: dict[OccupationVector, complex] = {}
    for nu, part in state.sectors().items():
        basis = enumerate_basis(n_modes, nu)
        for occ_in, amp in part.items():
            for occ_out in basis:
                out[occ_out] = out.get(occ_out, 0j) + amp * matrix_element(s, occ_out, occ_in)
    return StateVector(n_modes, out)


def sector_unitary(s: np.ndarray, total_photons: int) -> np.ndarray:
    """Matrix of all <m|U|n> in one photon-number sector (basis order of enumerate_basis)."""
    from .fock import enumerate_basis

    basis = enumerate_basis(s.shape[0], total_photons)
    return np.array([[matrix_element(s, m, n) for n in basis] for m in basis])

