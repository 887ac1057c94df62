"""Suite files: YAML with line-numbered diagnostics and unknown-key rejection.

    seed: 0
    threads: 1
    out: report.jsonl
    summary: summary.csv
    timing: false
    estimator: {samples: 1048576, t_nodes: 64}
    cases:
      - check: RS
        name: triangle
        instance: {body: {kind: simplex, n: 2}}
        estimator: {samples: 65536}     # optional per-case override
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .quadrature import EstimatorConfig
from .verify import CaseError, InequalityCase

TOP_KEYS = ("seed", "threads", "out", "summary", "timing", "estimator", "cases")
CASE_KEYS = ("check", "name", "instance", "estimator")
ESTIMATOR_KEYS = tuple(f.name for f in dataclasses.fields(EstimatorConfig) if f.name != "seed")


class ConfigError(ValueError):
    """A suite file that cannot be parsed or validated; the message carries the line."""


@dataclass
class SuiteConfig:
    cases: list[InequalityCase] = field(default_factory=list)
    seed: int = 0
    threads: int = 1
    out: str = "report.jsonl"
    summary: str = "summary.csv"
    timing: bool = False
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    lines: list[int] = field(default_factory=list)


def _line(node) -> int:
    return node.start_mark.line + 1


def _keys(node: yaml.MappingNode, allowed, where: str) -> dict:
    """Key -> value node, rejecting unknown and duplicate keys."""
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError(f"line {_line(node)}: {where} must be a mapping")
    out = {}
    for k, v in node.value:
        key = k.value
        if key not in allowed:
            raise ConfigError(f"line {_line(k)}: unknown key {key!r} in {where} (allowed: {', '.join(allowed)})")
        if key in out:
            raise ConfigError(f"line {_line(k)}: duplicate key {key!r} in {where}")
        out[key] = v
    return out


def _value(node):
    if node is None:
        return None
    return yaml.SafeLoader("").construct_document(node)


def _estimator(node, base: EstimatorConfig, where: str) -> EstimatorConfig:
    nodes = _keys(node, ESTIMATOR_KEYS, where)
    try:
        return replace(base, **{k: _value(v) for k, v in nodes.items()})
    except (TypeError, ValueError) as e:
        raise ConfigError(f"line {_line(node)}: {where}: {e}") from e


def parse_suite(text: str) -> SuiteConfig:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{where}{getattr(e, 'problem', None) or e}") from e
    cfg = SuiteConfig()
    if root is None:
        return cfg
    top = _keys(root, TOP_KEYS, "suite")
    try:
        for key in ("seed", "threads"):
            if key in top:
                setattr(cfg, key, int(_value(top[key])))
        for key in ("out", "summary"):
            if key in top:
                setattr(cfg, key, str(_value(top[key])))
        if "timing" in top:
            cfg.timing = bool(_value(top["timing"]))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"line {_line(root)}: {e}") from e
    if "estimator" in top:
        cfg.estimator = _estimator(top["estimator"], cfg.estimator, "estimator")
    cases = top.get("cases")
    if cases is None:
        return cfg
    if not isinstance(cases, yaml.SequenceNode):
        raise ConfigError(f"line {_line(cases)}: cases must be a list")
    for i, node in enumerate(cases.value):
        c = _keys(node, CASE_KEYS, f"case {i}")
        if "check" not in c:
            raise ConfigError(f"line {_line(node)}: case {i} has no 'check'")
        est = _estimator(c["estimator"], cfg.estimator, f"case {i} estimator") if "estimator" in c else cfg.estimator
        instance = _value(c["instance"]) if "instance" in c else {}
        if not isinstance(instance, dict):
            raise ConfigError(f"line {_line(c['instance'])}: case {i} instance must be a mapping")
        try:
            name = str(_value(c["name"])) if "name" in c else ""
            case = InequalityCase(str(_value(c["check"])), instance, est, name)
        except CaseError as e:
            raise ConfigError(f"line {_line(node)}: case {i}: {e}") from e
        cfg.cases.append(case)
        cfg.lines.append(_line(node))
    return cfg


def load_suite(path) -> SuiteConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_suite(text)


def default_suite_path(name: str = "default") -> Path:
    return Path(__file__).parent / "suites" / f"{name}.yaml"
