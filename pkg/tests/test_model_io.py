import json
from fractions import Fraction as Fr

import mpmath
import pytest
from hypothesis import given, strategies as st

from hamforge import model_io
from hamforge.expcalc import mpf
from hamforge.model_io import ModelFileError


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_mpf_roundtrip(x):
    v = mpf(x) / 3
    assert model_io.decode(model_io.encode(v)) == v


@given(st.fractions())
def test_fraction_roundtrip(x):
    assert model_io.decode(model_io.encode(x)) == x


def test_inf_and_sign():
    assert model_io.decode(model_io.encode(mpmath.inf)) == mpmath.inf
    assert model_io.decode(model_io.encode(mpf(-5) / 7)) == mpf(-5) / 7


@pytest.mark.parametrize("name", ["cp1_model", "cy_model", "expander_model"])
def test_model_roundtrip(name, request):
    m = request.getfixturevalue(name)
    text = model_io.dumps(m)
    m2 = model_io.loads(text)
    assert m2.alphas == m.alphas
    assert m2.q == m.q
    assert m2.deltas == m.deltas
    assert m2.a == m.a
    assert model_io.dumps(m2) == text


def test_save_load(tmp_path, cy_model):
    p = tmp_path / "m.json"
    model_io.save(cy_model, p)
    assert model_io.load(p).alphas == cy_model.alphas
    assert model_io.stored_certification(p) is None


def test_corrupted():
    with pytest.raises(ModelFileError):
        model_io.loads("{bad")
    with pytest.raises(ModelFileError):
        model_io.loads(json.dumps({"format": "other"}))


def test_version_mismatch(cp1_model):
    doc = json.loads(model_io.dumps(cp1_model))
    doc["version"] = 99
    with pytest.raises(ModelFileError, match="version"):
        model_io.model_from_dict(doc)


def test_missing_field(cp1_model):
    doc = json.loads(model_io.dumps(cp1_model))
    del doc["q"]
    with pytest.raises(ModelFileError):
        model_io.model_from_dict(doc)


def test_exact_fields_stay_exact(cp1_model):
    doc = json.loads(model_io.dumps(cp1_model))
    assert doc["roots"]["alphas"] == [{"rat": "-1/1"}, {"rat": "1/1"}]
    assert model_io.decode(doc["deltas"]) == [Fr(-1), Fr(-1)]
