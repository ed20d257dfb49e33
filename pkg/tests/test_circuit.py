import json
import math

import numpy as np
import pytest

from conftest import random_circuit
from qtruncate.circuit import (
    WIRINGS,
    BeamSplitter,
    Circuit,
    CircuitError,
    PhaseShifter,
    circuit_from_dict,
    compile_circuit,
    element_matrix,
    load_circuit,
    preset,
    preset_arity,
    preset_names,
    unitarity_error,
)


def test_beam_splitter_block():
    bs = BeamSplitter(1, 2, 0.25)
    np.testing.assert_allclose(bs.block(), [[0.5, math.sqrt(0.75)], [-math.sqrt(0.75), 0.5]])
    with pytest.raises(CircuitError):
        BeamSplitter(1, 1, 0.5)
    with pytest.raises(CircuitError):
        BeamSplitter(1, 2, 1.5)
    with pytest.raises(CircuitError):
        BeamSplitter(1, 2, float("nan"))


def test_phase_reduced_mod_two_pi():
    assert PhaseShifter(1, 2 * math.pi + 0.5).xi == pytest.approx(0.5)
    assert PhaseShifter(1, -0.5).xi == pytest.approx(2 * math.pi - 0.5)
    with pytest.raises(CircuitError):
        PhaseShifter(1, float("inf"))


def test_element_matrix_embeds_block():
    m = element_matrix(BeamSplitter(3, 1, 0.5), 3)
    t = math.sqrt(0.5)
    np.testing.assert_allclose(m, [[t, 0, -t], [0, 1, 0], [t, 0, t]])
    m = element_matrix(PhaseShifter(2, math.pi / 2), 2)
    np.testing.assert_allclose(m, np.diag([1, 1j]), atol=1e-16)


def test_compile_orders_last_element_leftmost():
    p = PhaseShifter(1, math.pi / 2)
    b = BeamSplitter(1, 2, 0.5)
    s = compile_circuit(Circuit(2, (p, b)))
    np.testing.assert_allclose(s, element_matrix(b, 2) @ element_matrix(p, 2))
    assert not np.allclose(s, element_matrix(p, 2) @ element_matrix(b, 2))


def test_random_circuits_are_unitary(rng):
    for n in range(1, 6):
        for _ in range(10):
            assert unitarity_error(random_circuit(rng, n).compile()) < 1e-12


def test_circuit_rejects_out_of_range_modes():
    with pytest.raises(CircuitError):
        Circuit(2, (BeamSplitter(1, 3, 0.5),))
    with pytest.raises(CircuitError):
        Circuit(0)


def test_qsd6_matrix():
    s = preset("qsd6", ["1/2", "1/2"], [0, "pi"]).compile()
    r = math.sqrt(0.5)
    expected = [[r, r, 0], [-0.5, 0.5, -r], [0.5, -0.5, -r]]
    np.testing.assert_allclose(s, expected, atol=1e-15)


@pytest.mark.parametrize("name", list(WIRINGS))
def test_eight_port_wirings_block_direct_path(name, rng):
    # output 1 never sees input 4: the apex coupler is absent in every wiring
    for _ in range(20):
        s = preset(name, rng.uniform(size=5), rng.uniform(0, 2 * np.pi, size=5)).compile()
        assert s[0, 3] == 0
        assert unitarity_error(s) < 1e-12


def test_preset_labels_and_arity():
    assert preset_names()[0] == "qsd6"
    assert preset_arity("qsd6") == 2 and preset_arity("qsd8") == 5
    c = preset("qsd8", [1] * 5)
    assert [e.label for e in c.elements] == ["P1", "B1", "P2", "B2", "P3", "B3", "P4", "B4", "P5", "B5"]
    assert c.element("B3").modes == (2, 3)
    assert c.element("P4").mode == 4
    with pytest.raises(KeyError):
        c.element("B9")
    with pytest.raises(CircuitError):
        preset("qsd9", [1] * 5)
    with pytest.raises(CircuitError):
        preset("qsd6", [1, 1, 1])


def test_without_removes_labelled_elements():
    c = preset("qsd6", [0.5, 0.5], [0, 1]).without(["P1", "P4"])
    assert all(isinstance(e, BeamSplitter) for e in c.elements)


def test_dict_round_trip():
    c = preset("qsd8", [0.1, 0.2, 0.3, 0.4, 0.5], [0.5, 0.4, 0.3, 0.2, 0.1])
    again = circuit_from_dict(json.loads(c.to_json()))
    np.testing.assert_array_equal(again.compile(), c.compile())
    assert [e.label for e in again.elements] == [e.label for e in c.elements]


def test_preset_reference_in_dict():
    c = circuit_from_dict({"preset": "qsd6", "t2": ["1/2", "1/2"], "xi": [0, "pi"]})
    np.testing.assert_allclose(c.compile(), preset("qsd6", [0.5, 0.5], [0, math.pi]).compile())


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"modes": 2}, "'modes' and 'elements'"),
        ({"modes": "2", "elements": []}, "integer"),
        ({"modes": 2, "elements": [{"type": "xx"}]}, "elements[0]"),
        ({"modes": 2, "elements": [{"type": "bs", "modes": [1, 2]}]}, "elements[0]"),
        ({"modes": 2, "elements": [{"type": "bs", "modes": [1, 2], "t2": 2}]}, "elements[0]"),
        ({"preset": "qsd6"}, "t2"),
        ([1, 2], "JSON object"),
    ],
)
def test_bad_circuit_dicts(data, fragment):
    with pytest.raises(CircuitError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        circuit_from_dict(data)


def test_load_circuit_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "modes": 2,\n  "elements": [,]\n}\n')
    with pytest.raises(CircuitError, match=":3:"):
        load_circuit(path)
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"modes": 2, "elements": [{"type": "bs", "modes": [1, 2], "t2": "1/2"}]}))
    assert load_circuit(good).elements[0].t2 == 0.5
