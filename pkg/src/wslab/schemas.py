"""JSON schemas for every file format read or written by the CLI."""

import jsonschema

from .errors import ValidationError

_INDEX = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}
_NUM = {"type": "number"}
_COMPLEX = {
    "type": "object",
    "properties": {"re": _NUM, "im": _NUM},
    "required": ["re"],
}
_COMPLEX_OR_REAL = {"oneOf": [_NUM, _COMPLEX]}
_COMPLEX_VECTOR = {"type": "array", "items": _COMPLEX}

WEIGHT_TABLE = {
    "type": "object",
    "properties": {
        "d": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 0},
        "bounds": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}}]},
        "weights": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"I": _INDEX, "j": {"type": "integer", "minimum": 1}, "re": _NUM, "im": _NUM, "w": _NUM},
                "required": ["I", "j"],
                "oneOf": [{"required": ["re"]}, {"required": ["w"]}],
            },
        },
    },
    "required": ["d", "N", "weights"],
}

POLYNOMIAL = {
    "type": "object",
    "properties": {
        "d": {"type": "integer", "minimum": 1},
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"I": _INDEX, "re": _NUM, "im": _NUM},
                "required": ["I", "re"],
            },
        },
    },
    "required": ["d", "terms"],
}

MATRIX = {
    "type": "object",
    "properties": {
        "rows": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX_OR_REAL}},
    },
    "required": ["rows"],
}


CONTRACTIVITY_REPORT = {
    "type": "object",
    "properties": {
        "valid": {"type": "boolean"},
        "violations": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"I": _INDEX, "j": {"type": "integer"}, "k": {"type": "integer"}, "residual": _NUM},
                "required": ["I", "j", "k", "residual"],
            },
        },
        "report": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {
                        "spherical_contractive": {"type": "boolean"},
                        "row_contractive": {"type": "boolean"},
                        "doubly_contractive": {"type": "boolean"},
                        "spherical_isometry": {"type": "boolean"},
                        "worst_spherical": {"type": "object", "properties": {"I": _INDEX, "defect": _NUM}, "required": ["I", "defect"]},
                        "worst_row": {"type": "object", "properties": {"I": _INDEX, "defect": _NUM}, "required": ["I", "defect"]},
                    },
                    "required": [
                        "spherical_contractive", "row_contractive", "doubly_contractive",
                        "spherical_isometry", "worst_spherical", "worst_row",
                    ],
                },
            ]
        },
    },
    "required": ["valid", "violations", "report"],
}

VN_GAP_REPORT = {
    "type": "object",
    "properties": {
        "op_norm": _NUM,
        "sup_norm": _NUM,
        "gap": _NUM,
        "witness_vector": _COMPLEX_VECTOR,
        "witness_point": _COMPLEX_VECTOR,
        "sup_method": {"enum": ["takagi", "optimize", "grid"]},
        "N": {"type": "integer", "minimum": 0},
    },
    "required": ["op_norm", "sup_norm", "gap", "witness_vector", "witness_point", "sup_method", "N"],
}

_CLASSIFICATION = {
    "type": "object",
    "properties": {
        "good": {"type": "array", "items": _INDEX},
        "bad": {"type": "array", "items": _INDEX},
        "scalable": {
            "type": "array",
            "items": {"type": "object", "properties": {"I": _INDEX, "j": {"type": "integer"}}, "required": ["I", "j"]},
        },
    },
    "required": ["good", "bad", "scalable"],
}

NORMALIZATION_TRACE = {
    "type": "object",
    "properties": {
        "steps": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"table": WEIGHT_TABLE, "classification": _CLASSIFICATION, "r": _NUM, "t": _NUM},
                "required": ["table", "classification", "r", "t"],
            },
        },
        "rescale": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {"direction": {"type": "integer"}, "from": _NUM, "to": _NUM, "r": _NUM},
                    "required": ["direction", "from", "to", "r"],
                },
            ]
        },
        "final": WEIGHT_TABLE,
        "reached_x0": {"type": "boolean"},
    },
    "required": ["steps", "rescale", "final", "reached_x0"],
}

TAKAGI_SUMMARY = {
    "type": "object",
    "properties": {
        "sigma": {"type": "array", "items": _NUM},
        "sigma_1": _NUM,
        "U": {"type": "array", "items": _COMPLEX_VECTOR},
    },
    "required": ["sigma", "sigma_1", "U"],
}


def _check(schema, doc, what):
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path)
        where = f"{what}{path}" if path else what
        raise ValidationError(f"{where}: {err.message}")


def validate_weight_table(doc):
    _check(WEIGHT_TABLE, doc, "weights-file")


def validate_polynomial(doc):
    _check(POLYNOMIAL, doc, "polynomial")


def validate_matrix(doc):
    _check(MATRIX, doc, "matrix")


def validate_report(schema, doc, what="report"):
    _check(schema, doc, what)
