"""Experiment configuration files: YAML documents of tagged records.

See ``docs/config.md`` for the schema. Parse failures raise
:class:`ConfigError` with the file line (when known) and the field path.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .operators import CertificationError, family_from_record, mapping_from_record, operator_from_record
from .problems import (
    ProblemInstance,
    certify_instance,
    gen_common_fixed_family,
    gen_pseudocontractive,
    gen_quadratic_box,
)
from .diagnostics import oracle_solve
from .schemes import (
    ConstantSchedule,
    PeriodicSchedule,
    SchemeSpec,
    StopRule,
    schedule_from_record,
)
from .sets import set_from_record


class ConfigError(ValueError):
    def __init__(self, message, path="", line=None, source=None):
        where = f"{source or '<config>'}"
        if line is not None:
            where += f":{line}"
        if path:
            where += f": {path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class _LineDict(dict):
    """Mapping that remembers the source line of each key."""

    lines: dict


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _LineDict()
    out.lines = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = key_node.start_mark.line + 1
    out.lines["__self__"] = node.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def load_yaml(text, source=None):
    try:
        return yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(str(getattr(exc, "problem", exc)), line=None if mark is None else mark.line + 1,
                          source=source) from exc


def _line(rec, key=None):
    lines = getattr(rec, "lines", None)
    if not lines:
        return None
    return lines.get(key, lines.get("__self__"))


GENERATORS = {"quadratic_box", "common_fixed_family", "pseudocontractive"}


@dataclass
class ExperimentConfig:
    problem: ProblemInstance
    schemes: list
    stop: StopRule
    output_dir: Path
    compare: bool = False
    x0: np.ndarray = None
    source: str = None
    raw: dict = field(default_factory=dict)

    def problem_record(self):
        return self.problem.to_record()


def _schedule(rec, alpha, path, source):
    """Schedule record; ``times_alpha`` scales by the certified ISM constant."""
    if isinstance(rec, dict) and "times_alpha" in rec:
        if not math.isfinite(alpha):
            raise ConfigError("times_alpha needs a finite ISM constant", path, _line(rec), source)
        kind = rec.get("type", "constant")
        if kind == "constant":
            return ConstantSchedule(float(rec["times_alpha"]) * alpha)
        if kind == "periodic":
            return PeriodicSchedule(tuple(float(v) * alpha for v in rec["times_alpha"]))
        raise ConfigError(f"times_alpha not supported for {kind!r}", path, _line(rec), source)
    try:
        return schedule_from_record(rec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule ({exc})", path, _line(rec), source) from exc


def build_problem(rec, seed=None, source=None) -> ProblemInstance:
    if not isinstance(rec, dict):
        raise ConfigError("problem must be a mapping", "problem", source=source)
    try:
        gen = rec.get("generator")
        if gen is not None:
            if gen not in GENERATORS:
                raise ConfigError(f"unknown generator {gen!r}; expected one of {sorted(GENERATORS)}",
                                  "problem.generator", _line(rec, "generator"), source)
            s = int(rec.get("seed", 0) if seed is None else seed)
            if gen == "quadratic_box":
                p = gen_quadratic_box(int(rec["d"]), s)
            elif gen == "common_fixed_family":
                p = gen_common_fixed_family(int(rec["d"]), int(rec.get("m", 4)), s,
                                            mu=rec.get("mu", 0.5))
            else:
                S = rec.get("S")
                d = int(rec["d"])
                p = gen_pseudocontractive(d, float(rec.get("k", 0.0)), s,
                                          S=None if S is None else mapping_from_record(S, d))
                p.generator = dict(rec)
            if "x0" in rec:
                p.x0 = np.asarray(rec["x0"], dtype=float)
            return p
        for key in ("set", "operator", "family"):
            if key not in rec:
                raise ConfigError("missing field", f"problem.{key}", _line(rec), source)
        C = set_from_record(rec["set"])
        A = operator_from_record(rec["operator"], C.dim)
        try:
            W = family_from_record(rec["family"], C.dim)
        except CertificationError as exc:
            pair = "" if exc.pair is None else f"; witnessing pair x={np.asarray(exc.pair[0]).tolist()}, " \
                                               f"y={np.asarray(exc.pair[1]).tolist()}"
            raise ConfigError(f"certification failed: {exc}{pair}", f"problem.family.mappings[{(exc.member or 1) - 1}]",
                              _line(rec, "family"), source) from exc
        p = ProblemInstance(C, A, W, label=rec.get("label", "explicit"))
        certify_instance(p, rng=0 if seed is None else seed)
        if rec.get("oracle", True):
            p.oracle_hint = oracle_solve(p)
        if "x0" in rec:
            p.x0 = np.asarray(rec["x0"], dtype=float)
        return p
    except ConfigError:
        raise
    except CertificationError as exc:
        pair = "" if exc.pair is None else f"; witnessing pair x={np.asarray(exc.pair[0]).tolist()}, " \
                                           f"y={np.asarray(exc.pair[1]).tolist()}"
        raise ConfigError(f"certification failed: {exc}{pair}", "problem", _line(rec), source) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid problem ({type(exc).__name__}: {exc})", "problem", _line(rec), source) from exc


def build_scheme(rec, alpha, path, source=None) -> SchemeSpec:
    if not isinstance(rec, dict) or "name" not in rec:
        raise ConfigError("scheme entry needs a 'name'", path, _line(rec) if isinstance(rec, dict) else None, source)
    kw = {}
    for key, attr in (("lambda", "lam"), ("alpha", "alpha"), ("beta", "beta"), ("gamma", "gamma")):
        if key in rec:
            kw[attr] = _schedule(rec[key], alpha, f"{path}.{key}", source)
    if "anchor" in rec:
        kw["anchor"] = np.asarray(rec["anchor"], dtype=float)
    try:
        return SchemeSpec(rec["name"], variant=rec.get("variant", "verbatim"), label=rec.get("label"), **kw)
    except ValueError as exc:
        raise ConfigError(str(exc), path, _line(rec, "name"), source) from exc


def parse_config(text, source=None, seed=None, output_dir=None) -> ExperimentConfig:
    raw = load_yaml(text, source)
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping", source=source)
    if "problem" not in raw:
        raise ConfigError("missing field", "problem", source=source)
    schemes = raw.get("schemes")
    if not isinstance(schemes, list) or not schemes:
        raise ConfigError("at least one scheme is required", "schemes", _line(raw, "schemes"), source)
    problem = build_problem(raw["problem"], seed, source)
    specs = [build_scheme(s, problem.A.alpha, f"schemes[{i}]", source) for i, s in enumerate(schemes)]
    stop_rec = raw.get("stop", {}) or {}
    try:
        stop = StopRule(stop_rec.get("residual", "combined"), float(stop_rec.get("tol", 1e-8)),
                        int(stop_rec.get("max_iter", 100_000)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "stop", _line(raw, "stop"), source) from exc
    out = Path(output_dir if output_dir is not None else raw.get("output_dir", "fixvi-out"))
    x0 = raw.get("x0")
    return ExperimentConfig(problem, specs, stop, out, bool(raw.get("compare", False)),
                            None if x0 is None else np.asarray(x0, dtype=float), source, raw)


def load_config(path, seed=None, output_dir=None) -> ExperimentConfig:
    path = Path(path)
    x = parse_config(path.read_text(), str(path), seed, output_dir)
    if x.output_dir is not None and not x.output_dir.is_absolute() and output_dir is None:
        x.output_dir = path.parent / x.output_dir
    return x


def plain(obj):
    """Strip numpy and line-tracking types so the result dumps as plain YAML."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
