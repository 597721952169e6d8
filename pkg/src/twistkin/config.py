"""JSON run configuration: schema, defaults and validation.

Every section is optional except ``photon1``, ``photon2`` and ``atom``.
Defaults are merged in before validation so the resolved configuration
written to the run manifest is complete.  Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import jsonschema

from .amplitude import PWAmplitudeModel
from .errors import PhysicsError, SchemaError
from .kinematics import AtomBeam, BesselMode, check_sign_convention

_NUM = {"type": "number"}
_OPT_NUM = {"type": ["number", "null"]}
_INT = {"type": "integer"}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


_PHOTON = _obj(
    {
        "omega": _NUM,
        "kappa": _NUM,
        "m": _INT,
        "kz": _OPT_NUM,
        "direction": {"enum": [1, -1]},
    },
    required=("omega", "kappa", "m"),
)

SCHEMA = _obj(
    {
        "photon1": _PHOTON,
        "photon2": _PHOTON,
        "atom": _obj(
            {
                "mass": _NUM,
                "p": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                "e_exc": _NUM,
                "relativistic": {"type": "boolean"},
            },
            required=("mass",),
        ),
        "amplitude": _obj(
            {
                "kind": {"enum": ["constant", "relative_phase", "user_table"]},
                "m0": _COMPLEX,
                "phase_ab": _NUM,
                "table_ma": {"type": ["array", "null"], "items": _COMPLEX, "minItems": 1},
                "table_mb": {"type": ["array", "null"], "items": _COMPLEX, "minItems": 1},
            }
        ),
        "scan": _obj(
            {
                "n": {"type": "integer", "minimum": 2},
                "min": _OPT_NUM,
                "max": _OPT_NUM,
                "margin": {"type": "number", "minimum": 0},
                "k_perp": _OPT_NUM,
                "n_phi": {"type": "integer", "minimum": 1},
                "delta": _OPT_NUM,
                "n_theta": {"type": "integer", "minimum": 2},
            }
        ),
        "regularization": _obj(
            {
                "eps_boundary": _OPT_NUM,
                "boundary_cutoff": _OPT_NUM,
                "ring_sigma": _OPT_NUM,
            }
        ),
        "events": _obj({"n": {"type": "integer", "minimum": 1}, "chunk_size": {"type": "integer", "minimum": 1}}),
        "oracle": _obj(
            {
                "k_perp": _OPT_NUM,
                "phi_k": _NUM,
                "sigmas": {"type": ["array", "null"], "items": _NUM, "minItems": 1},
                "n_radial": {"type": "integer", "minimum": 8},
            }
        ),
        "lineshape": _obj(
            {
                "profile": {"enum": ["delta", "lorentzian", "gaussian", "double_line"]},
                "width_steps": {"type": "number", "exclusiveMinimum": 0},
                "separation_steps": {"type": "number"},
                "grid_n": {"type": "integer", "minimum": 3},
                "grid_step": _OPT_NUM,
                "settings": {
                    "type": "array",
                    "items": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
                    "minItems": 1,
                },
                "noise": {"type": "number", "minimum": 0},
                "lambda": _OPT_NUM,
                "nonnegativity": {"type": "boolean"},
                "measurements": {
                    "type": ["array", "null"],
                    "items": _obj({"m": {"type": "array", "items": _INT, "minItems": 2, "maxItems": 2},
                                   "path": {"type": "string"}}, required=("m", "path")),
                },
            }
        ),
        "smearing": _obj(
            {
                "sigma_p": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 3, "maxItems": 3},
                "ladder": {"type": ["array", "null"], "items": {"type": "number", "minimum": 0}},
                "n_quad": {"type": "integer", "minimum": 1},
                "n_mc": {"type": "integer", "minimum": 1},
                "method": {"enum": ["auto", "quadrature", "mc"]},
                "threshold": _OPT_NUM,
            }
        ),
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "threads": {"type": "integer", "minimum": 1},
        "output": _obj(
            {
                "dir": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
                "svg": {"type": "boolean"},
            }
        ),
    },
    required=("photon1", "photon2", "atom"),
)

DEFAULTS: Dict[str, Any] = {
    "atom": {"p": [0.0, 0.0, 0.0], "e_exc": 2.0, "relativistic": False},
    "amplitude": {"kind": "constant", "m0": 1.0, "phase_ab": 0.0, "table_ma": None, "table_mb": None},
    "scan": {"n": 401, "min": None, "max": None, "margin": 0.05, "k_perp": None, "n_phi": 360,
             "delta": None, "n_theta": 512},
    "regularization": {"eps_boundary": None, "boundary_cutoff": None, "ring_sigma": None},
    "events": {"n": 100000, "chunk_size": 65536},
    "oracle": {"k_perp": None, "phi_k": 0.0, "sigmas": None, "n_radial": 48},
    "lineshape": {"profile": "lorentzian", "width_steps": 5.0, "separation_steps": 10.0, "grid_n": 41,
                  "grid_step": None, "settings": [[m, m] for m in range(1, 9)], "noise": 0.0,
                  "lambda": None, "nonnegativity": True, "measurements": None},
    "smearing": {"sigma_p": [0.0, 0.0, 0.0], "ladder": None, "n_quad": 16, "n_mc": 4096,
                 "method": "auto", "threshold": None},
    "seed": 0,
    "threads": 1,
    "output": {"dir": "out", "format": "csv", "svg": False},
}
PHOTON_DEFAULTS = {"kz": None}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _find_line(text: str, key: Optional[str]) -> Optional[int]:
    if not key:
        return None
    m = re.search(r'"' + re.escape(str(key)) + r'"\s*:', text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


@dataclass
class RunConfig:
    """Validated configuration plus the domain objects it describes."""

    photon1: BesselMode
    photon2: BesselMode
    atom: AtomBeam
    model: PWAmplitudeModel
    resolved: Dict[str, Any] = field(repr=False)

    def section(self, name: str) -> Dict[str, Any]:
        return self.resolved[name]

    @property
    def seed(self) -> int:
        return int(self.resolved["seed"])

    @property
    def threads(self) -> int:
        return int(self.resolved["threads"])

    @property
    def cutoff(self) -> Optional[float]:
        return self.resolved["regularization"]["boundary_cutoff"]

    @property
    def eps_boundary(self) -> Optional[float]:
        return self.resolved["regularization"]["eps_boundary"]


def _photon(spec: dict, default_direction: int) -> BesselMode:
    if spec.get("kz") is None:
        direction = spec.get("direction", default_direction)
        return BesselMode.photon(spec["omega"], spec["kappa"], spec["m"], direction)
    return BesselMode(spec["omega"], spec["kz"], spec["kappa"], spec["m"])


def build(resolved: Dict[str, Any]) -> RunConfig:
    """Domain objects from a resolved configuration; re-checks physical invariants."""
    atom_s = resolved["atom"]
    rel = bool(atom_s["relativistic"])
    b1 = _photon(resolved["photon1"], 1)
    b2 = _photon(resolved["photon2"], -1)
    atom = AtomBeam(atom_s["mass"], tuple(atom_s["p"]), atom_s["e_exc"], rel)
    amp = resolved["amplitude"]
    if amp["kind"] == "constant":
        model = PWAmplitudeModel.constant(_complex(amp["m0"]))
    elif amp["kind"] == "relative_phase":
        model = PWAmplitudeModel.relative_phase(amp["phase_ab"], _complex(amp["m0"]))
    else:
        if amp["table_ma"] is None or amp["table_mb"] is None:
            raise PhysicsError("user_table model needs table_ma and table_mb")
        model = PWAmplitudeModel.user_table([_complex(v) for v in amp["table_ma"]],
                                            [_complex(v) for v in amp["table_mb"]])
    check_sign_convention(b1, b2)
    return RunConfig(b1, b2, atom, model, resolved)


def resolve(raw: Dict[str, Any], text: str = "") -> Dict[str, Any]:
    """Validate ``raw`` against the schema and fill in every default."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        key = None
        if err.validator == "additionalProperties":
            extra = set(err.instance) - set(err.schema.get("properties", {}))
            key = sorted(extra)[0] if extra else None
        elif err.validator == "required":
            m = re.search(r"'([^']+)'", err.message)
            key = m.group(1) if m else None
        elif path:
            key = str(path[-1]) if not isinstance(path[-1], int) else str(path[-2] if len(path) > 1 else path[-1])
        dotted = ".".join(str(p) for p in path)
        full = ".".join(x for x in (dotted, key if key and key not in dotted.split(".") else "") if x)
        raise SchemaError(full or "<root>", _find_line(text, key), err.message)
    resolved = _merge(DEFAULTS, raw)
    for name in ("photon1", "photon2"):
        resolved[name] = _merge(PHOTON_DEFAULTS, resolved[name])
    return resolved


def parse_config(path) -> RunConfig:
    """Load, validate and build a run configuration.

    ``path`` may also point at a run manifest; its ``config`` entry is used,
    which makes manifests directly re-runnable.

    Raises
    ------
    SchemaError
        Malformed JSON, unknown keys or wrongly typed values.
    PhysicsError
        A physical invariant of a photon, atom or amplitude model fails.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise SchemaError(str(path), None, "file not found") from exc
    except UnicodeDecodeError as exc:
        raise SchemaError(str(path), None, "not valid UTF-8") from exc
    return parse_config_text(text)


def parse_config_text(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("<json>", exc.lineno, exc.msg) from exc
    if isinstance(raw, dict) and "config" in raw and "config_sha256" in raw:
        raw = raw["config"]
    if not isinstance(raw, dict):
        raise SchemaError("<root>", 1, "configuration must be a JSON object")
    return build(resolve(raw, text))
