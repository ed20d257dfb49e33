import math

import numpy as np
import pytest

from qtruncate.circuit import preset
from qtruncate.conditioning import (
    DetectionPattern,
    SumMismatch,
    TargetPattern,
    aligned_deviation,
    herald,
    output_state,
    profile_coefficients,
    profile_fidelity,
    project,
    success_probability,
    truncation_profile,
)
from qtruncate.fock import SingleModeInput, StateVector

R3 = math.sqrt(3)
E = math.exp(-1)

# exact profiles from a symbolic (sympy, permutation-sum) computation
D2 = ("qsd6", [1 / 2, 1 / 2], [0, math.pi], (1, 0), [-1 / 2, -1 / 2])
D3A = ("qsd6", [(3 - R3) / 6] * 2, [0, 0], (1, 1), [1 / 3] * 3)
D3B = ("qsd6", [(3 - R3) / 6, (3 + R3) / 6], [0, math.pi], (1, 1), [1 / 3] * 3)
D4 = ("qsd8", [1 / 3, 1 / 4, 1, 1 / 3, 1 / 2], [0, 0, 0, 0, math.pi / 2], (1, 1, 1), [-1 / 12] * 4)
F2 = ("qsd8", [1, 1 / 2, 1 / 3, 1 / 2, 1], [0] * 5, (1, 1, 1), [0, 0, -math.sqrt(6) / 6, 0])
F3 = ("qsd8", [1 / 2, 1 / 2, 1, 1 / 2, 1 / 2], [0, 0, 0, 0, math.pi / 2], (1, 1, 1), [0, 0, 0, -3 / 16])


def _profile(case, method="permanent"):
    name, t2, xi, anc, _ = case
    return truncation_profile(preset(name, t2, xi), anc, DetectionPattern(anc), method=method)


@pytest.mark.parametrize("case", [D2, D3A, D3B, D4, F2, F3], ids=["d2", "d3a", "d3b", "d4", "f2", "f3"])
@pytest.mark.parametrize("method", ["permanent", "evolve"])
def test_profiles_match_symbolic_oracle(case, method):
    prof = _profile(case, method)
    np.testing.assert_allclose(prof.c, case[-1], atol=1e-14)


def test_known_probabilities():
    sig = SingleModeInput.coherent(1.0)
    assert success_probability(_profile(D2), sig) == pytest.approx(E / 2, abs=1e-15)
    assert success_probability(_profile(D3A), sig) == pytest.approx(5 / (18 * math.e), abs=1e-15)
    assert success_probability(_profile(D4), sig) == pytest.approx(E / 54, abs=1e-15)


def test_target_patterns():
    assert TargetPattern.truncation(3).label() == "012"
    t = TargetPattern.punch(4, [0, 2])
    assert t.label() == ".1.3" and t.holes == [0, 2]
    np.testing.assert_array_equal(t.indicator(), [0, 1, 0, 1])
    assert TargetPattern.fock(4, 2).kept == {2}
    with pytest.raises(ValueError):
        TargetPattern.punch(2, [0, 1])
    with pytest.raises(ValueError):
        TargetPattern.fock(3, 3)
    with pytest.raises(ValueError):
        TargetPattern(0, frozenset({0}))


def test_profile_fidelity_invariances():
    t = TargetPattern.truncation(3)
    assert profile_fidelity(np.array([1, 1, 1]) * 0.3j, t) == pytest.approx(1.0)
    assert profile_fidelity(np.array([1, 0, 0]), t) == pytest.approx(1 / 3)
    assert profile_fidelity(np.array([1, -1, 0]), TargetPattern.punch(3, [2])) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        profile_fidelity(np.zeros(3), t)
    with pytest.raises(ValueError):
        profile_fidelity(np.ones(2), t)


def test_aligned_deviation():
    t = TargetPattern.punch(3, [1])
    assert aligned_deviation(np.array([1j, 0, 1j]), t) == pytest.approx(0.0)
    assert aligned_deviation(np.array([1, 0.25, 0.5]), t) == pytest.approx(0.5)


def test_detection_pattern_defaults_and_errors():
    p = DetectionPattern((1, 0, 2))
    assert p.measured_modes == (2, 3, 4) and p.output_mode(4) == 1 and p.total() == 3
    assert DetectionPattern((1,), measured_modes=(1,)).output_mode(2) == 2
    with pytest.raises(ValueError):
        DetectionPattern((1, 0), measured_modes=(2, 2))
    with pytest.raises(ValueError):
        DetectionPattern((1,)).output_mode(3)


def test_sum_mismatch_raises():
    c = preset("qsd6", [0.5, 0.5], [0, 0])
    with pytest.raises(SumMismatch):
        truncation_profile(c, (1, 0), DetectionPattern((1, 1)))
    with pytest.raises(ValueError):
        truncation_profile(c, (1, 0, 0), DetectionPattern((1, 0)))


def test_profile_method_rejected():
    with pytest.raises(ValueError):
        profile_coefficients(preset("qsd6", [1, 1]), (1, 0), DetectionPattern((1, 0)), [0], method="x")


def test_success_probability_equals_full_projection(rng):
    for _ in range(10):
        t2, xi = rng.uniform(size=5), rng.uniform(0, 2 * np.pi, size=5)
        circ = preset("qsd8", t2, xi)
        det = DetectionPattern((1, 1, 1))
        sig = SingleModeInput.coherent(complex(rng.normal(), rng.normal()) * 0.7, cutoff=8)
        prof = truncation_profile(circ, (1, 1, 1), det)
        state, p = herald(circ, (1, 1, 1), det, sig)
        assert p == pytest.approx(success_probability(prof, sig), abs=1e-12)
        out, _ = output_state(prof, sig)
        # herald() keeps the captured, unnormalized signal amplitudes
        scale = np.linalg.norm(sig.coefficients())
        np.testing.assert_allclose(state.coefficients(4) / scale, out.coefficients(4), atol=1e-12)


def test_output_state_fidelity_with_ideal():
    sig = SingleModeInput.coherent(1.0)
    state, f = output_state(_profile(D3A), sig)
    assert f == pytest.approx(1.0, abs=1e-14)
    g = sig.coefficients()[:3]
    np.testing.assert_allclose(state.coefficients(3), g / 3 / np.linalg.norm(sig.coefficients()), atol=1e-15)
    _, f = output_state(_profile(F2), sig, TargetPattern.fock(4, 2))
    assert f == pytest.approx(1.0)


def test_impossible_heralding():
    prof = truncation_profile(preset("qsd6", [1, 1]), (1, 0), DetectionPattern((1, 0)))
    assert prof.norm2() == 0
    sig = SingleModeInput.coherent(1.0)
    assert success_probability(prof, sig) == 0.0
    with pytest.raises(ValueError):
        output_state(prof, sig)


def test_project_marginalizes_correctly():
    psi = StateVector(3, {(0, 1, 0): 0.6, (1, 1, 0): 0.8, (1, 0, 1): 1.0})
    state, p = project(psi, DetectionPattern((1, 0)))
    assert dict(state.items()) == {(0,): 0.6, (1,): 0.8}
    assert p == pytest.approx(0.5)
