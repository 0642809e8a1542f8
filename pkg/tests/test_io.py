import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacres import (BandSet, EventuallyPeriodicOperator, PerturbationDeterminant,
                    SingularityConfiguration, build_measure, check_damsim,
                    validate_configuration)
from jacres import schemas
from jacres.io import (InputError, canonical_json, csv_text, dump_json, load_json, round_floats,
                       validate)

FREE_BANDS = BandSet((-2.0, 2.0))

json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.text(max_size=5)
    | st.floats(allow_nan=False, allow_infinity=False),
    lambda inner: st.lists(inner, max_size=4) | st.dictionaries(st.text(max_size=4), inner, max_size=4),
    max_leaves=12)


def test_canonical_json_sorts_keys_and_keeps_float_markers():
    assert canonical_json({"b": 1.0, "a": [2, 0.5]}) == '{"a": [2, 0.5], "b": 1.0}\n'


def test_canonical_json_uses_seventeen_digits():
    assert canonical_json(0.1) == "0.10000000000000001\n"
    assert canonical_json(-0.0) == "0.0\n"


def test_canonical_json_rejects_non_finite():
    with pytest.raises(ValueError):
        canonical_json([float("inf")])


def test_canonical_json_accepts_numpy_scalars():
    assert canonical_json(np.float64(2.5)) == "2.5\n"


@settings(max_examples=100)
@given(json_values)
def test_canonical_json_round_trips(obj):
    text = canonical_json(obj)
    assert canonical_json(json.loads(text)) == text
    assert json.loads(text) == json.loads(json.dumps(obj))


def test_round_floats():
    assert round_floats({"x": [1.0000000000001, -1e-12, 3]}) == {"x": [1.0, 0.0, 3]}


def test_load_json_reports_line_and_column(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{\n  "a": [1, 2,\n}\n')
    with pytest.raises(InputError, match=r"bad\.json:3:1:"):
        load_json(str(f))


def test_load_json_missing_file(tmp_path):
    with pytest.raises(InputError, match="missing.json"):
        load_json(str(tmp_path / "missing.json"))


def test_schema_violation_names_location(tmp_path):
    f = tmp_path / "op.json"
    f.write_text('{"head_b": [2, "x"], "tail": {"a": [1], "b": [0]}}')
    with pytest.raises(InputError, match="head_b/1"):
        load_json(str(f), schemas.OPERATOR)


def test_dump_then_load(tmp_path):
    f = tmp_path / "out.json"
    dump_json(str(f), {"k": [1.5]})
    assert load_json(str(f)) == {"k": [1.5]}


def test_csv_text_formats_floats():
    assert csv_text(["x", "y"], [(1, 0.5)]) == "x,y\n1,0.5\n"


def test_documents_validate_against_their_schemas():
    c = SingularityConfiguration.from_lists([2.5], [2.8, 3.0, 1 + 1j, 1 - 1j])
    validate(c.to_json(), schemas.SINGULARITIES)
    validate(build_measure(c, FREE_BANDS).to_json(), schemas.SPECTRAL_MEASURE)
    validate(EventuallyPeriodicOperator((1.0,), (2.0,), EventuallyPeriodicOperator.free().tail)
             .to_json(), schemas.OPERATOR)
    validate(validate_configuration(c, FREE_BANDS).to_json(), schemas.REPORT)
    validate(check_damsim(PerturbationDeterminant((1.0, -2.0))).to_json(), schemas.REPORT)
    validate(PerturbationDeterminant((1.0, -2.0)).to_json(), schemas.PERTURBATION_DETERMINANT)


def test_complex_witnesses_serialize():
    rep = validate_configuration(SingularityConfiguration.from_lists([], [1 + 1j]), FREE_BANDS)
    obj = json.loads(canonical_json(rep.to_json()))
    validate(obj, schemas.REPORT)
    assert obj["ok"] is False
