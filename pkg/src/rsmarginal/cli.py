"""Command line: rsmarginal verify | estimate | list-checks."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np
import yaml

from .config import ConfigError, default_suite_path, load_suite
from .funclass import delta_alpha_many
from .geometry import difference_body
from .quadrature import EstimatorConfig, measure_section
from .verify import (CaseError, alpha_of_s, build_body, build_density, build_function, build_subspace,
                     exit_code, function_section, list_checks, parse_s, run_suite, write_jsonl, write_summary,
                     write_timing)


class UsageError(ValueError):
    pass


def _inline(text: str | None, what: str):
    """Parse an inline YAML value such as '{kind: simplex, n: 2}'."""
    if text is None:
        return None
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise UsageError(f"--{what}: {e}") from e


def _table(reports) -> str:
    rows = [("check", "name", "verdict", "ratio", "sigma", "realized")]
    for r in reports:
        rows.append((r.check_id, r.name or r.instance_hash, r.verdict, f"{r.ratio:.6g}", f"{r.sigma:.2g}",
                     f"{r.realized_constant:.6g}"))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def cmd_verify(args) -> int:
    suite = load_suite(args.suite or default_suite_path())
    seed = suite.seed if args.seed is None else args.seed
    threads = suite.threads if args.threads is None else args.threads
    cases = suite.cases
    if args.samples is not None:
        cases = [replace(c, estimator=replace(c.estimator, samples=args.samples)) for c in cases]
    if threads > 1:
        # case-level parallelism only; chunk-level threads would oversubscribe
        cases = [replace(c, estimator=replace(c.estimator, threads=1)) for c in cases]
    reports = run_suite(cases, seed, threads)
    out = args.out or suite.out
    summary = args.summary or suite.summary
    write_jsonl(reports, out)
    write_summary(reports, summary)
    if args.timing or suite.timing:
        write_timing(reports, out + ".timing")
    print(_table(reports))
    counts = {v: sum(r.verdict == v for r in reports) for v in ("pass", "expected_violation", "fail", "inconclusive")}
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    return exit_code(reports)


def cmd_estimate(args) -> int:
    cfg = EstimatorConfig(samples=args.samples or 2 ** 20, seed=args.seed or 0)
    if args.kind in ("volume", "section"):
        spec = _inline(args.body, "body")
        if spec is None:
            raise UsageError("--body is required")
        K = build_body(spec)
        if args.difference:
            K = difference_body(K)
        n = K.dim
        H = build_subspace(_inline(args.subspace, "subspace") if args.kind == "section" else None, n)
        d = build_density(_inline(args.density, "density"), n)
        y = np.zeros(n) if args.point is None else np.asarray(_inline(args.point, "point"), dtype=float)
        if y.shape != (n,):
            raise UsageError(f"--point needs {n} coordinates")
        est = measure_section(K, H, y, d, cfg)
    elif args.kind == "marginal":
        spec = _inline(args.function, "function")
        if not isinstance(spec, dict) or "n" not in spec:
            raise UsageError("--function needs a mapping with 'n'")
        f = build_function(spec, int(spec["n"]))
        H = build_subspace(_inline(args.subspace, "subspace"), f.n)
        est = function_section(f, H, build_density(_inline(args.density, "density"), f.n), cfg)
    else:
        spec = _inline(args.function, "function")
        if not isinstance(spec, dict) or "n" not in spec:
            raise UsageError("--function needs a mapping with 'n'")
        f = build_function(spec, int(spec["n"]))
        if args.alpha is not None and args.s is not None:
            raise UsageError("give --alpha or --s, not both")
        alpha = float(args.alpha) if args.alpha is not None else alpha_of_s(parse_s(args.s or 0))
        x = np.asarray(_inline(args.x, "x"), dtype=float)
        if x.shape != (f.n,):
            raise UsageError(f"--x needs {f.n} coordinates")
        val = float(delta_alpha_many(f, alpha, x[None, :]).value[0])
        print(f"{val:.10g} ± 0 (delta)")
        return 0
    print(f"{est.value:.10g} ± {est.std_error:.3g} ({est.method})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsmarginal", description="Verify marginal Rogers-Shephard inequalities.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a suite of catalog checks")
    v.add_argument("--suite", help="suite file (default: the shipped default suite)")
    v.add_argument("--seed", type=int)
    v.add_argument("--samples", type=int, help="override the sample count of every case")
    v.add_argument("--out", help="JSON-lines report path")
    v.add_argument("--summary", help="CSV summary path")
    v.add_argument("--threads", type=int, help="cases run concurrently (results do not change)")
    v.add_argument("--timing", action="store_true", help="also write wall times to OUT.timing")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("estimate", help="one-off estimate")
    e.add_argument("kind", choices=["volume", "section", "marginal", "delta"])
    e.add_argument("--body", help="inline body, e.g. '{kind: simplex, n: 2}'")
    e.add_argument("--difference", action="store_true", help="use the difference body K - K")
    e.add_argument("--subspace", help="inline subspace, e.g. '{axes: [0]}'")
    e.add_argument("--density", help="density family or inline mapping")
    e.add_argument("--point", help="translate y of the section, e.g. '[0, 0.5]'")
    e.add_argument("--function", help="inline function, e.g. '{family: gaussian, n: 2}'")
    e.add_argument("--alpha", type=float)
    e.add_argument("--s", help="paper exponent s (f is (1/s)-concave); accepts p/q; write --s=-inf for the log-concave case")
    e.add_argument("--x", help="evaluation point for delta, e.g. '[1, 0]'")
    e.add_argument("--seed", type=int)
    e.add_argument("--samples", type=int)
    e.set_defaults(func=cmd_estimate)

    lc = sub.add_parser("list-checks", help="print the check catalog")
    lc.set_defaults(func=lambda args: print(list_checks()) or 0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except (ConfigError, CaseError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - any failure inside a check is a runtime error
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
