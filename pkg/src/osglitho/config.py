"""Run configuration: a versioned JSON document validated before any work.

Complex numbers may be written as [re, im], {"re": .., "im": ..} or
{"modulus": .., "phase": ..} with the phase in radians. Serialization always
emits the [re, im] form, so parse -> serialize -> parse is the identity.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .errors import ConfigError
from .kernel import MODELS, DEFAULT_MAX_TERMS, GridSpec
from .lithography import LithTarget
from .states import (DEFAULT_EPS, AtomPrep, SimParams, TwoModeFockState, auto_mode,
                     product_state)

SCHEMA_VERSION = 1
MODES = ("simulate", "target", "oracle-check", "sweep")
FORMATS = ("csv", "bin", "both")

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        {"type": "object", "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
         "required": ["re", "im"], "additionalProperties": False},
        {"type": "object",
         "properties": {"modulus": {"type": "number", "minimum": 0},
                        "phase": {"type": "number"}},
         "required": ["modulus", "phase"], "additionalProperties": False},
    ]
}

_MODE = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["fock", "coherent", "squeezed"]},
        "alpha": _COMPLEX,
        "r": {"type": "number", "minimum": 0},
        "phi_sq": {"type": "number"},
        "n": {"type": "integer", "minimum": 0},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_TARGET = {
    "type": "object",
    "properties": {
        "p_bar": {"type": "number", "exclusiveMinimum": 0},
        "phi_bar": {"type": "number"},
        "r": {"type": "number", "minimum": 0},
        "r_prime": {"type": "number", "minimum": 0},
    },
    "required": ["p_bar", "phi_bar"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": list(MODES)},
        "params": {
            "type": "object",
            "properties": {
                "lam": {"type": "number", "exclusiveMinimum": 0},
                "k_dr": {"type": "number", "exclusiveMinimum": 0},
                "eps_trunc": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "n_max": {"type": ["integer", "null"], "minimum": 0},
            },
            "required": ["lam"],
            "additionalProperties": False,
        },
        "field": {
            "type": "object",
            "properties": {
                "a": _MODE,
                "b": _MODE,
                "matrix": {"type": "array", "items": {"type": "array", "items": _COMPLEX}},
                "matrix_file": {"type": "string"},
            },
            "oneOf": [
                {"required": ["a", "b"], "not": {"anyOf": [{"required": ["matrix"]},
                                                          {"required": ["matrix_file"]}]}},
                {"required": ["matrix"], "not": {"anyOf": [{"required": ["a"]},
                                                          {"required": ["matrix_file"]}]}},
                {"required": ["matrix_file"], "not": {"anyOf": [{"required": ["a"]},
                                                               {"required": ["matrix"]}]}},
            ],
            "additionalProperties": False,
        },
        "atom": {
            "type": "object",
            "properties": {"kappa": {"type": "number"}, "c_g": _COMPLEX, "c_e": _COMPLEX},
            "oneOf": [{"required": ["kappa"], "not": {"required": ["c_g"]}},
                      {"required": ["c_g", "c_e"], "not": {"required": ["kappa"]}}],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "n_p": {"type": "integer", "minimum": 3},
                "n_phi": {"type": "integer", "minimum": 4},
                "p_max": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "model": {"enum": list(MODELS)},
        "max_terms": {"type": "number", "exclusiveMinimum": 0},
        "output": {
            "type": "object",
            "properties": {
                "dir": {"type": "string"},
                "format": {"enum": list(FORMATS)},
                "stem": {"type": "string", "minLength": 1},
                "exclusion_radius": {"type": ["number", "null"], "minimum": 0},
            },
            "additionalProperties": False,
        },
        "target": _TARGET,
        "targets": {"type": "array", "items": _TARGET, "minItems": 1},
        "simulate_targets": {"type": "boolean"},
        "oracle": {
            "type": "object",
            "properties": {
                "quadrature_n_max": {"type": "integer", "minimum": 0, "maximum": 8},
                "quadrature_samples": {"type": "integer", "minimum": 1},
                "bogoliubov_n_max": {"type": "integer", "minimum": 0},
                "evolution_grid": {"type": "integer", "minimum": 64},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "mode", "params"],
    "additionalProperties": False,
}


def parse_complex(value: Any) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict):
        if set(value) == {"re", "im"}:
            return complex(float(value["re"]), float(value["im"]))
        if set(value) == {"modulus", "phase"}:
            return cmath.rect(float(value["modulus"]), float(value["phase"]))
    raise ConfigError(f"cannot read a complex number from {value!r}")


def dump_complex(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


@dataclass(frozen=True)
class ModeSpec:
    kind: str
    alpha: complex = 0j
    r: float = 0.0
    phi_sq: float = math.pi
    n: int = 0

    def build(self, eps: float):
        return auto_mode(self.kind, eps, alpha=self.alpha, r=self.r, phi_sq=self.phi_sq,
                         n=self.n)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "fock":
            out["n"] = self.n
        else:
            out["alpha"] = dump_complex(self.alpha)
            if self.kind == "squeezed":
                out["r"] = self.r
                out["phi_sq"] = self.phi_sq
        return out


@dataclass(frozen=True)
class FieldSpec:
    a: Optional[ModeSpec] = None
    b: Optional[ModeSpec] = None
    matrix: Optional[tuple] = None  # nested tuples of complex
    matrix_file: Optional[str] = None

    def build(self, params: SimParams, base: Path = Path(".")) -> TwoModeFockState:
        if self.a is not None:
            a = self.a.build(params.eps_trunc)
            b = self.b.build(params.eps_trunc)
            return product_state(a, b, params.eps_trunc, params.n_max)
        if self.matrix is not None:
            coeffs = np.array(self.matrix, dtype=complex)
        else:
            path = Path(self.matrix_file)
            if not path.is_absolute():
                path = base / path
            try:
                coeffs = np.load(path)
            except OSError as exc:
                raise ConfigError(f"cannot read C-matrix {path}: {exc}") from exc
        state = TwoModeFockState.from_matrix(coeffs, params.n_max)
        if abs(state.captured_weight - 1.0) > max(params.eps_trunc, 1e-12) \
                and state.captured_weight > 1.0:
            raise ConfigError("C-matrix norm exceeds one")
        return state

    def to_dict(self) -> dict:
        if self.a is not None:
            return {"a": self.a.to_dict(), "b": self.b.to_dict()}
        if self.matrix is not None:
            return {"matrix": [[dump_complex(z) for z in row] for row in self.matrix]}
        return {"matrix_file": self.matrix_file}


@dataclass(frozen=True)
class TargetSpec:
    p_bar: float
    phi_bar: float
    r: float = 0.0
    r_prime: float = 0.0

    @property
    def target(self) -> LithTarget:
        return LithTarget(self.p_bar, self.phi_bar)

    def to_dict(self) -> dict:
        return {"p_bar": self.p_bar, "phi_bar": self.phi_bar, "r": self.r,
                "r_prime": self.r_prime}


@dataclass(frozen=True)
class OutputSpec:
    dir: str = "out"
    format: str = "bin"
    stem: str = "grid"
    exclusion_radius: Optional[float] = None


@dataclass(frozen=True)
class OracleSpec:
    quadrature_n_max: int = 3
    quadrature_samples: int = 4
    bogoliubov_n_max: int = 12
    evolution_grid: int = 256
    seed: int = 1


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SimParams
    field: Optional[FieldSpec] = None
    atom: AtomPrep = dc_field(default_factory=AtomPrep.ground)
    kappa: Optional[float] = None
    grid: GridSpec = GridSpec()
    model: str = "exact"
    max_terms: float = DEFAULT_MAX_TERMS
    output: OutputSpec = OutputSpec()
    target: Optional[TargetSpec] = None
    targets: tuple = ()
    simulate_targets: bool = False
    oracle: OracleSpec = OracleSpec()
    base_dir: str = "."

    def with_overrides(self, **kwargs) -> "RunConfig":
        return replace(self, **kwargs)


def _mode_spec(d: dict) -> ModeSpec:
    kind = d["kind"]
    if kind == "fock":
        if "alpha" in d or "r" in d:
            raise ConfigError("Fock modes take only 'n'")
        return ModeSpec("fock", n=int(d.get("n", 0)))
    alpha = parse_complex(d.get("alpha", 0))
    if kind == "coherent":
        if "r" in d or "phi_sq" in d:
            raise ConfigError("coherent modes take no squeeze parameters")
        return ModeSpec("coherent", alpha)
    return ModeSpec("squeezed", alpha, float(d.get("r", 0.0)), float(d.get("phi_sq", math.pi)))


def _target_spec(d: dict) -> TargetSpec:
    return TargetSpec(float(d["p_bar"]), float(d["phi_bar"]), float(d.get("r", 0.0)),
                      float(d.get("r_prime", 0.0)))


def config_from_dict(doc: dict, base_dir: str = ".") -> RunConfig:
    """Validate a parsed JSON document and build the run configuration."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None

    p = doc["params"]
    params = SimParams(float(p["lam"]), float(p.get("k_dr", 2 * math.pi / 10)),
                       float(p.get("eps_trunc", DEFAULT_EPS)), p.get("n_max"))

    fld = None
    if "field" in doc:
        f = doc["field"]
        if "a" in f:
            fld = FieldSpec(_mode_spec(f["a"]), _mode_spec(f["b"]))
        elif "matrix" in f:
            fld = FieldSpec(matrix=tuple(tuple(parse_complex(z) for z in row)
                                         for row in f["matrix"]))
        else:
            fld = FieldSpec(matrix_file=f["matrix_file"])

    atom, kappa = AtomPrep.ground(), None
    if "atom" in doc:
        a = doc["atom"]
        try:
            if "kappa" in a:
                kappa = float(a["kappa"])
                atom = AtomPrep.from_phase(kappa)
            else:
                atom = AtomPrep(parse_complex(a["c_g"]), parse_complex(a["c_e"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    g = doc.get("grid", {})
    grid = GridSpec(int(g.get("n_p", 256)), int(g.get("n_phi", 256)), g.get("p_max"))
    o = doc.get("output", {})
    output = OutputSpec(o.get("dir", "out"), o.get("format", "bin"), o.get("stem", "grid"),
                        o.get("exclusion_radius"))
    oracle = OracleSpec(**doc.get("oracle", {}))

    mode = doc["mode"]
    target = _target_spec(doc["target"]) if "target" in doc else None
    targets = tuple(_target_spec(t) for t in doc.get("targets", ()))
    if mode == "simulate" and fld is None:
        raise ConfigError("simulate needs a 'field' section")
    if mode == "target" and target is None:
        raise ConfigError("target mode needs a 'target' section")
    if mode == "sweep" and not targets:
        raise ConfigError("sweep mode needs a non-empty 'targets' list")

    return RunConfig(mode, params, fld, atom, kappa, grid, doc.get("model", "exact"),
                     float(doc.get("max_terms", DEFAULT_MAX_TERMS)), output, target, targets,
                     bool(doc.get("simulate_targets", False)), oracle, base_dir)


def config_to_dict(cfg: RunConfig) -> dict:
    p = cfg.params
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "mode": cfg.mode,
        "params": {"lam": p.lam, "k_dr": p.k_dr, "eps_trunc": p.eps_trunc, "n_max": p.n_max},
        "grid": {"n_p": cfg.grid.n_p, "n_phi": cfg.grid.n_phi, "p_max": cfg.grid.p_max},
        "model": cfg.model,
        "max_terms": cfg.max_terms,
        "output": {"dir": cfg.output.dir, "format": cfg.output.format,
                   "stem": cfg.output.stem, "exclusion_radius": cfg.output.exclusion_radius},
        "simulate_targets": cfg.simulate_targets,
        "oracle": dict(cfg.oracle.__dict__),
    }
    if cfg.field is not None:
        doc["field"] = cfg.field.to_dict()
    if cfg.kappa is not None:
        doc["atom"] = {"kappa": cfg.kappa}
    else:
        doc["atom"] = {"c_g": dump_complex(cfg.atom.c_g), "c_e": dump_complex(cfg.atom.c_e)}
    if cfg.target is not None:
        doc["target"] = cfg.target.to_dict()
    if cfg.targets:
        doc["targets"] = [t.to_dict() for t in cfg.targets]
    return doc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(doc, str(path.parent))


def dumps_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True)
