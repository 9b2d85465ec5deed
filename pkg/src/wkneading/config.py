"""System definition files.

A definition is a YAML mapping::

    name: appendix-c
    params: {M: 5}
    interval: [0, 3]
    cuts: [1, 2]
    branches:
      - {slope: 2, intercept: 0, weight: 1}
      - {slope: -2, intercept: 4, weight: 1}
      - {slope: 2, intercept: -4, weight: M}
    mode: exact          # or float
    degree: 64           # truncation N
    identity_degree: 12  # N_id

Numbers may be written as ``"p/q"`` strings.  A bare name is looked up in
``params``, which ``--param NAME=VALUE`` can override.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import yaml

from .system import EXACT, FLOAT, ValidationError, WeightedSystem, validate_system

FIXTURE_NAMES = ("tent", "golden", "appendix_c", "discont_3_2", "zero_weight")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


class ConfigError(ValueError):
    def __init__(self, message: str, path=None, line: int | None = None, field: str | None = None):
        self.path, self.line, self.field = path, line, field
        where = [str(path)] if path else []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(field)
        super().__init__(f"{': '.join([', '.join(where), message]) if where else message}")


@dataclass
class RunConfig:
    path: str | None = None
    N: int = 64
    N_id: int = 12
    depth_cap: int = 24
    max_cylinders: int = 10**7
    mode: str = FLOAT
    tol: float = 1e-12
    out_dir: str = "."
    seed: int = 0
    params: dict = field(default_factory=dict)

    def check(self) -> None:
        for name in ("N", "N_id", "depth_cap", "max_cylinders"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive", field=name)
        if not self.tol > 0:
            raise ConfigError("tol must be positive", field="tol")
        if self.N_id > self.N:
            raise ConfigError(f"N_id={self.N_id} exceeds N={self.N}", field="N_id")

    @property
    def caps(self) -> dict:
        return {"max_depth": self.depth_cap, "max_count": self.max_cylinders}


def fixture_path(name: str) -> Path:
    """Path of a shipped definition file."""
    return Path(str(resources.files("wkneading") / "systems" / f"{name}.yaml"))


def resolve_path(spec: str) -> Path:
    """A file path, or the name of a shipped fixture."""
    p = Path(spec)
    if p.exists() or spec not in FIXTURE_NAMES:
        return p
    return fixture_path(spec)


def parse_param(text: str) -> tuple[str, str]:
    name, sep, value = text.partition("=")
    name = name.strip()
    if not sep or not _NAME.match(name):
        raise ConfigError(f"expected NAME=VALUE, got {text!r}", field="param")
    return name, value.strip()


def _lines(node, prefix="") -> dict:
    """Map dotted field paths to 1-based line numbers."""
    out = {prefix: node.start_mark.line + 1} if prefix else {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{prefix}.{k.value}" if prefix else str(k.value)
            out.update(_lines(v, key))
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_lines(v, f"{prefix}[{i}]"))
    return out


def _number(value, params: dict, where: str, line, path=None):
    if isinstance(value, bool) or value is None:
        raise ConfigError(f"expected a number, got {value!r}", path, line, where)
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        s = value.strip()
        if _NAME.match(s):
            if s not in params:
                raise ConfigError(f"unknown parameter {s!r}", path, line, where)
            return _number(params[s], {}, where, line, path)
        try:
            return Fraction(s)
        except ValueError:
            pass
        try:
            return float(s)
        except ValueError:
            raise ConfigError(f"cannot read {value!r} as a number", path, line, where) from None
    raise ConfigError(f"expected a number, got {type(value).__name__}", path, line, where)


def load_text(text: str, path=None, overrides: dict | None = None,
              mode: str | None = None) -> tuple[WeightedSystem, RunConfig]:
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML parse error: {getattr(exc, 'problem', exc)}", path, line) from None
    if not isinstance(raw, dict):
        raise ConfigError("expected a mapping at top level", path, 1)
    lines = _lines(node)

    def line_of(key):
        return lines.get(key)

    known = {"name", "params", "interval", "cuts", "branches", "mode", "degree",
             "identity_degree", "depth_cap", "max_cylinders", "tol", "snap", "seed"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown field {key!r}", path, line_of(key), key)

    params = dict(raw.get("params") or {})
    params.update(overrides or {})

    def num(v, where):
        return _number(v, params, where, line_of(where), path)

    if "interval" not in raw:
        raise ConfigError("missing field", path, None, "interval")
    interval = raw["interval"]
    if not isinstance(interval, list) or len(interval) != 2:
        raise ConfigError("expected [a, b]", path, line_of("interval"), "interval")
    cuts = raw.get("cuts")
    if not isinstance(cuts, list):
        raise ConfigError("expected a list of cutting points", path, line_of("cuts"), "cuts")
    branches = raw.get("branches")
    if not isinstance(branches, list):
        raise ConfigError("expected a list of branches", path, line_of("branches"), "branches")

    desc = {
        "name": str(raw.get("name", Path(path).stem if path else "")),
        "interval": [num(v, f"interval[{i}]") for i, v in enumerate(interval)],
        "cuts": [num(v, f"cuts[{i}]") for i, v in enumerate(cuts)],
        "branches": [],
        "mode": mode or raw.get("mode", FLOAT),
        "degree": raw.get("degree", 64),
    }
    if "snap" in raw:
        desc["snap"] = num(raw["snap"], "snap")
    for i, b in enumerate(branches):
        where = f"branches[{i}]"
        if not isinstance(b, dict):
            raise ConfigError("expected a mapping with slope, intercept, weight", path,
                              line_of(where), where)
        for k in b:
            if k not in ("slope", "intercept", "weight"):
                raise ConfigError(f"unknown field {k!r}", path, line_of(f"{where}.{k}"), f"{where}.{k}")
        for k in ("slope", "intercept"):
            if k not in b:
                raise ConfigError(f"missing field {k!r}", path, line_of(where), where)
        desc["branches"].append({k: num(v, f"{where}.{k}") for k, v in b.items()})

    try:
        sys = validate_system(desc)
    except ValidationError as exc:
        key = exc.field or ""
        pos = re.search(r"at position (\d+)", str(exc))
        if exc.field == "cuts" and pos and cuts:
            key = f"cuts[{min(int(pos.group(1)), len(cuts) - 1)}]"
        elif exc.branch is not None and exc.field in (None, "branches"):
            key = f"branches[{exc.branch}]"
        raise ConfigError(str(exc), path, line_of(key) or line_of(exc.field or ""), key or None) from None

    cfg = RunConfig(
        path=str(path) if path else None,
        N=int(raw.get("degree", 64)),
        N_id=int(raw.get("identity_degree", 12)),
        depth_cap=int(raw.get("depth_cap", 24)),
        max_cylinders=int(raw.get("max_cylinders", 10**7)),
        mode=sys.mode,
        tol=float(raw.get("tol", 1e-12)),
        seed=int(raw.get("seed", 0)),
        params=params,
    )
    cfg.check()
    return sys, cfg


def parse_config(path, overrides: dict | None = None, mode: str | None = None
                 ) -> tuple[WeightedSystem, RunConfig]:
    """Read a definition file; see the module docstring for the format."""
    p = resolve_path(str(path))
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read file ({exc.strerror})", p) from None
    return load_text(text, p, overrides, mode)


__all__ = ["ConfigError", "RunConfig", "parse_config", "load_text", "fixture_path",
           "parse_param", "EXACT", "FLOAT"]
