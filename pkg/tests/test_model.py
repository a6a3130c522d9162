import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sbforms.forms import energy
from sbforms.model import (
    BeurlingDenyData,
    FiniteModel,
    InvalidModelError,
    ModelFileError,
    SchemaError,
    assemble,
    decompose,
    load_model,
    model_from_dict,
    model_to_dict,
    random_model,
    save_model,
    validate_model,
)

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 25)


def chain(L, m=(1.0, 1.0)):
    return FiniteModel(np.array(m), np.array(L, dtype=float))


def test_validation_examples():
    assert validate_model(chain([[-1, 1], [1, -1]])).passed
    bad = validate_model(chain([[-1, 2], [1, -1]]))
    assert not bad.passed and not bad["m-symmetry"].passed
    assert bad["m-symmetry"].worst in {(0, 1), (1, 0)}
    killing = validate_model(chain([[-1, 1], [1, -2]]))
    assert killing.passed and killing.killing_states == (1,)


def test_validation_flags_each_invariant():
    assert not validate_model(chain([[-1, 1], [1, -1]], m=(1.0, -1.0)))["positive-measure"].passed
    assert not validate_model(chain([[1, -1], [-1, 1]]))["nonnegative-rates"].passed
    assert not validate_model(chain([[0, 1], [1, -1]]))["sub-markov"].passed


def test_decompose_examples():
    bd = decompose(chain([[-1, 1], [1, -1]]))
    np.testing.assert_array_equal(bd.J, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(bd.kappa, [0, 0])
    bd = decompose(chain(np.zeros((2, 2))))
    assert not bd.J.any() and not bd.kappa.any()
    bd = decompose(chain([[-2, 1], [2, -3]], m=(2.0, 1.0)))
    assert bd.J[0, 1] == 2.0
    np.testing.assert_array_equal(bd.kappa, [2.0, 1.0])


def test_decompose_rejects_invalid():
    with pytest.raises(InvalidModelError) as info:
        decompose(chain([[-1, 2], [1, -1]]))
    assert not info.value.report.passed


def test_assemble_examples():
    L = assemble(BeurlingDenyData([[0, 1], [1, 0]], [0, 0]), [1, 1]).L
    np.testing.assert_array_equal(L, [[-1, 1], [1, -1]])
    L = assemble(BeurlingDenyData(np.zeros((2, 2)), [3, 0]), [1, 1]).L
    np.testing.assert_array_equal(L, np.diag([-3.0, 0.0]))


def test_bd_data_rejects_bad_input():
    for J, k in [([[0, 1], [2, 0]], [0, 0]), ([[0, -1], [-1, 0]], [0, 0]), ([[1, 0], [0, 0]], [0, 0]),
                 ([[0, 1], [1, 0]], [-1, 0])]:
        with pytest.raises(ValueError):
            BeurlingDenyData(J, k)


def test_random_model_contract():
    a, b = random_model(9, 12, 0.4, True), random_model(9, 12, 0.4, True)
    np.testing.assert_array_equal(a.L, b.L)
    np.testing.assert_array_equal(a.m, b.m)
    assert not decompose(random_model(3, 10, killing=False)).kappa.any()
    np.testing.assert_array_equal(random_model(0, 1).L, [[0.0]])
    m = random_model(4, 30).m
    assert m.min() >= 0.5 and m.max() <= 2.0
    with pytest.raises(ValueError):
        random_model(0, 3, density=0.0)


def test_model_is_immutable():
    model = random_model(1, 4)
    with pytest.raises(ValueError):
        model.L[0, 0] = 1.0


@given(seeds, sizes, st.booleans())
def test_round_trips(seed, n, killing):
    model = random_model(seed, n, 0.6, killing)
    bd = decompose(model)
    back = assemble(bd, model.m)
    scale = max(1.0, np.abs(model.L).max())
    assert np.abs(back.L - model.L).max() <= 1e-12 * scale
    bd2 = decompose(back)
    assert np.abs(bd2.J - bd.J).max() <= 1e-12 * max(1.0, bd.J.max())
    assert np.abs(bd2.kappa - bd.kappa).max() <= 1e-12 * max(1.0, bd.kappa.max())


@given(seeds, sizes, st.booleans())
def test_energy_nonnegative_and_normal_contraction(seed, n, killing):
    model = random_model(seed, n, 0.6, killing)
    u = 3.0 * np.random.default_rng(seed).standard_normal(n)
    e = energy(model, u)
    assert e >= -1e-12 * max(1.0, abs(e))
    assert energy(model, np.clip(u, -1.0, 1.0)) <= e + 1e-12 * max(1.0, e)


# ---------------------------------------------------------------------------
# files


def test_minimal_file(tmp_path):
    path = tmp_path / "two.json"
    path.write_text('{"n": 2, "m": [1, 1], "L": [[-1, 1], [1, -1]]}')
    model = load_model(path)
    np.testing.assert_array_equal(model.L, [[-1, 1], [1, -1]])


def test_jump_form_file(tmp_path):
    path = tmp_path / "jk.json"
    path.write_text(json.dumps({"n": 2, "m": [2, 1], "J": [[0, 2], [2, 0]], "kappa": [2, 1], "labels": ["a", "b"]}))
    model = load_model(path)
    np.testing.assert_allclose(model.L, [[-2, 1], [2, -3]])
    assert model.labels == ("a", "b")


@pytest.mark.parametrize(
    "doc,field",
    [
        ({"n": 2, "m": [1, -1], "L": [[-1, 1], [1, -1]]}, "m.1"),
        ({"n": 2, "m": [1, 1]}, None),
        ({"n": 2, "m": [1, 1], "L": [[-1, 1], [1, -1]], "J": [[0, 1], [1, 0]], "kappa": [0, 0]}, None),
        ({"n": 2, "m": [1, 1, 1], "L": [[-1, 1], [1, -1]]}, "m"),
        ({"n": 2, "m": [1, 1], "L": [[-1, 1]]}, "L"),
    ],
)
def test_schema_errors(doc, field):
    with pytest.raises(SchemaError) as info:
        model_from_dict(doc)
    assert info.value.field == field


def test_negative_m_error_names_field():
    with pytest.raises(SchemaError, match="m"):
        model_from_dict({"n": 2, "m": [1, -1], "L": [[-1, 1], [1, -1]]})


def test_invalid_model_file():
    with pytest.raises(InvalidModelError):
        model_from_dict({"n": 2, "m": [1, 1], "L": [[-1, 2], [1, -1]]})
    with pytest.raises(InvalidModelError):
        model_from_dict({"n": 2, "m": [1, 1], "J": [[0, 1], [2, 0]], "kappa": [0, 0]})


def test_file_errors(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ModelFileError):
        load_model(bad)


@given(seeds, st.integers(1, 12), st.booleans(), st.sampled_from(["L", "J"]))
def test_save_load_bitwise(seed, n, killing, form):
    import tempfile
    from pathlib import Path

    model = random_model(seed, n, 0.7, killing)
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "m.json"
        save_model(model, path, form)
        back = load_model(path)
    np.testing.assert_array_equal(back.m, model.m)
    if form == "L":
        np.testing.assert_array_equal(back.L, model.L)
    else:
        np.testing.assert_allclose(back.L, model.L, rtol=1e-12, atol=1e-15)


def test_model_to_dict_rejects_unknown_form():
    with pytest.raises(ValueError):
        model_to_dict(random_model(0, 2), "X")
