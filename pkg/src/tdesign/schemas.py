"""JSON schemas for every artifact the command line writes."""

from __future__ import annotations

import jsonschema

_NUM = {"type": "number"}
_NUM_OR_NULL = {"type": ["number", "null"]}
_INT = {"type": "integer"}

MANIFEST = {
    "type": "object",
    "required": ["subcommand", "inputs", "params", "seed", "tool_version", "timestamp"],
    "properties": {
        "subcommand": {"type": "string"},
        "inputs": {"type": "object"},
        "params": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "tool_version": {"type": "string"},
        "timestamp": {"type": "string"},
    },
}

ARCHITECTURE = {
    "type": "object",
    "required": ["N", "q", "layers"],
    "additionalProperties": False,
    "properties": {
        "N": {"type": "integer", "minimum": 2},
        "q": {"type": "number", "exclusiveMinimum": 1},
        "periodic_depth": {"type": ["integer", "null"], "minimum": 1},
        "layers": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "array", "items": _INT, "minItems": 2}},
        },
    },
}

CLUSTER_GRAPH = {
    "type": "object",
    "required": ["weights", "edges"],
    "properties": {
        "weights": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "edges": {"type": "array", "items": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2}},
    },
}

SINGULAR_REPORT = {
    "type": "object",
    "required": ["unit_dim", "ssv", "method", "residual", "converged"],
    "properties": {
        "unit_dim": _INT,
        "ssv": {"type": "number", "minimum": 0},
        "method": {"enum": ["dense", "iterative"]},
        "residual": _NUM,
        "converged": {"type": "boolean"},
        "matvecs": _INT,
    },
}

C_VALUE = {
    "type": "object",
    "required": ["value", "source", "assumptions", "rigorous"],
    "properties": {
        "value": {"type": "number", "exclusiveMinimum": 0},
        "source": {"type": "string"},
        "assumptions": {"type": "object"},
        "rigorous": {"type": "boolean"},
    },
}

BOUND_REPORT = {
    "type": "object",
    "required": ["theorem_path", "inputs", "s_star", "k_star", "d_star", "c_used", "tight_log_term", "tightest"],
    "properties": {
        "theorem_path": {"enum": ["complete_periodic", "incomplete_periodic", "incomplete_integer", "aperiodic", "conjectured"]},
        "inputs": {"type": "object", "required": ["N", "q", "t", "eps"]},
        "s_star": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "k_star": {"type": "number", "exclusiveMinimum": 0},
        "k_ceil": _INT,
        "d_star": _NUM,
        "c_used": {"anyOf": [C_VALUE, {"type": "null"}]},
        "tight_log_term": {"type": "boolean"},
        "rigorous": {"type": "boolean"},
        "tightest": {"type": "boolean"},
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}

PIPELINE = {
    "type": "object",
    "required": ["reports", "tightest", "skipped"],
    "properties": {
        "reports": {"type": "array", "items": BOUND_REPORT, "minItems": 1},
        "tightest": {"type": ["string", "null"]},
        "skipped": {"type": "array", "items": {"type": "string"}},
        "decomposition": {"type": ["object", "null"]},
    },
}


def _artifact(result: dict) -> dict:
    return {
        "type": "object",
        "required": ["manifest", "result"],
        "properties": {"manifest": MANIFEST, "result": result},
    }


RESULTS = {
    "generate": ARCHITECTURE,
    "gap": {
        "type": "object",
        "required": ["report", "layer_range"],
        "properties": {"report": SINGULAR_REPORT, "layer_range": {"type": "array", "items": _INT}},
    },
    "frame-potential": {
        "type": "object",
        "required": ["k_periods", "t"],
        "properties": {
            "k_periods": _INT,
            "t": _INT,
            "exact": _NUM_OR_NULL,
            "mc": {
                "type": ["object", "null"],
                "required": ["estimate", "std_error", "samples"],
                "properties": {"estimate": _NUM, "std_error": _NUM, "samples": _INT},
            },
        },
    },
    "reduce": {
        "type": "object",
        "required": ["loop_sizes", "graph", "trace"],
        "properties": {
            "loop_sizes": {"type": "array", "items": _INT},
            "graph": CLUSTER_GRAPH,
            "trace": {"type": "object", "required": ["start", "steps"]},
        },
    },
    "decompose": {
        "type": "object",
        "required": ["decompositions"],
        "properties": {
            "decompositions": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["method", "num_layers", "bound", "contraction_verified", "layers"],
                    "properties": {
                        "method": {"enum": ["tree", "loglog"]},
                        "num_layers": _INT,
                        "bound": _INT,
                        "contraction_verified": {"type": "boolean"},
                        "layers": {"type": "array"},
                    },
                },
            }
        },
    },
    "bound": PIPELINE,
    "analyze": {
        "type": "object",
        "required": ["decomposition", "bounds"],
        "properties": {"decomposition": {"type": "object"}, "bounds": {"anyOf": [PIPELINE, {"type": "null"}]}},
    },
    "sweep": {
        "type": "object",
        "required": ["rows"],
        "properties": {"rows": {"type": "array", "items": {"type": "object"}}},
    },
    "anneal": {
        "type": "object",
        "required": ["best_arch", "best_ssv", "t_start", "trace"],
        "properties": {
            "best_arch": ARCHITECTURE,
            "best_ssv": _NUM,
            "t_start": _NUM,
            "trace": {"type": "array", "items": {"type": "object"}},
        },
    },
    "ensemble": {
        "type": "object",
        "required": ["stats"],
        "properties": {
            "stats": {"type": "object", "required": ["trials", "mean", "std", "std_error", "counts"]},
            "averaged": {"type": ["object", "null"]},
        },
    },
}

ARTIFACTS = {name: _artifact(schema) for name, schema in RESULTS.items()}


def validate_artifact(subcommand: str, artifact: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``artifact`` breaks its schema."""
    jsonschema.validate(artifact, ARTIFACTS[subcommand])
