"""JSON schemas for every document read or written by the command line."""

from __future__ import annotations

_num = {"type": "number"}
_nums = {"type": "array", "items": _num}

PERIODIC_BLOCK = {
    "type": "object",
    "properties": {"p": {"type": "integer", "minimum": 1}, "a": _nums, "b": _nums},
    "required": ["a", "b"],
}

BAND_SET = {
    "type": "object",
    "properties": {"edges": {"type": "array", "items": _num, "minItems": 2}},
    "required": ["edges"],
}

OPERATOR = {
    "type": "object",
    "properties": {"head_a": _nums, "head_b": _nums, "tail": PERIODIC_BLOCK},
    "required": ["tail"],
}

RESONANCE = {
    "type": "object",
    "properties": {"re": _num, "im": _num, "mult": {"type": "integer", "minimum": 1}},
    "required": ["re"],
}

SINGULARITIES = {
    "type": "object",
    "properties": {
        "eigenvalues": _nums,
        "resonances": {"type": "array", "items": RESONANCE},
        "bands": BAND_SET,
        "tail": PERIODIC_BLOCK,
        "a_poly": _nums,
    },
    "required": ["eigenvalues", "resonances"],
}

SPECTRAL_MEASURE = {
    "type": "object",
    "properties": {
        "bands": BAND_SET,
        "a_poly": {"type": "array", "items": _num, "minItems": 1},
        "masses": {"type": "array", "items": {
            "type": "object", "properties": {"E": _num, "w": _num}, "required": ["E", "w"]}},
    },
    "required": ["bands", "a_poly", "masses"],
}

COEFFICIENTS = {
    "type": "object",
    "properties": {
        "a": _nums, "b": _nums,
        "s": {"type": "integer", "minimum": 0},
        "k": {"type": "integer", "minimum": 0},
        "tail": PERIODIC_BLOCK,
    },
    "required": ["a", "b", "s", "k", "tail"],
}

OPERATOR_OR_COEFFICIENTS = {"anyOf": [OPERATOR, COEFFICIENTS]}

CHECK = {
    "type": "object",
    "properties": {"name": {"type": "string"}, "passed": {"type": "boolean"},
                   "message": {"type": "string"}, "witnesses": {"type": "array"}},
    "required": ["name", "passed"],
}

REPORT = {
    "type": "object",
    "properties": {"ok": {"type": "boolean"}, "checks": {"type": "array", "items": CHECK}},
    "required": ["ok", "checks"],
}

STABILITY_CONFIG = {
    "type": "object",
    "properties": {
        "base_cfg": SINGULARITIES,
        "bands": BAND_SET,
        "epsilons": _nums,
        "truncation_radii": {"type": "array", "items": {"type": ["number", "null"]}},
        "trials": {"type": "integer", "minimum": 1},
        "n_report": {"type": "integer", "minimum": 1},
        "edge_exclusion": {"type": ["number", "null"]},
        "seed": {"type": "integer"},
    },
    "required": ["base_cfg", "bands"],
}

STABILITY_REPORT = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "epsilon": _num,
            "radius": {"type": ["number", "null"]},
            "median_err": _nums,
            "median_max_err": _num,
            "slope": {"type": ["number", "null"]},
        },
        "required": ["epsilon", "radius", "median_err", "slope"],
    },
}

PERTURBATION_DETERMINANT = {
    "type": "object",
    "properties": {"coeffs": {"type": "array", "items": _num, "minItems": 1}},
    "required": ["coeffs"],
}

ALL = {
    "periodic_block": PERIODIC_BLOCK,
    "band_set": BAND_SET,
    "operator": OPERATOR,
    "singularities": SINGULARITIES,
    "spectral_measure": SPECTRAL_MEASURE,
    "coefficients": COEFFICIENTS,
    "report": REPORT,
    "stability_config": STABILITY_CONFIG,
    "stability_report": STABILITY_REPORT,
    "perturbation_determinant": PERTURBATION_DETERMINANT,
}
