"""``shadowalloc`` command line: generate, guarantee-curve, benchmark, budget.

Exit codes: 0 success, 2 input format, 3 domain or parameter error, 4 resource cap.
"""
from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import RNG_ALGORITHM, check_budget, check_delta
from .estimation import BenchmarkConfig, run_benchmark
from .exceptions import (
    ContractViolation,
    DomainError,
    FormatError,
    NonConvergenceError,
    ResourceCapError,
    StructuralError,
)
from .guarantees import (
    alpha_delta,
    count_compatible,
    default_alpha,
    epsilon_guarantee,
    single_shot_budget,
    truncated_guarantee,
    worst_case_budget,
)
from .hamiltonian import norms, read_hamiltonian
from .schemes import SchemeConfig, SchemeState, format_settings, guarantee_curve, next_setting, truncated_pipeline

EXIT_OK, EXIT_FORMAT, EXIT_DOMAIN, EXIT_CAP = 0, 2, 3, 4
DEFAULT_DELTA = 0.02
DEFAULT_EPSILON = 0.0016  # Hartree, chemical accuracy


def _atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def _provenance(args, h) -> dict:
    return {
        "tool_version": __version__,
        "command_line": shlex.join(["shadowalloc"] + args.argv),
        "seed": args.seed,
        "hamiltonian_hash": h.content_hash(),
        "rng": RNG_ALGORITHM,
    }


def _scheme_config(args, seed=None) -> SchemeConfig:
    return SchemeConfig(
        weight=args.weight,
        indicator=args.indicator,
        alpha=args.alpha,
        epsilon=args.epsilon if args.weight == "derandomization" else None,
        seed=args.seed if seed is None else seed,
    )


def _settings_for(args, h, budget):
    """Settings and guarantee for one budget, honouring --truncate for ShadowGrouping."""
    config = _scheme_config(args)
    if args.truncate:
        if args.scheme != "shadowgrouping":
            raise DomainError("--truncate is only defined for --scheme shadowgrouping")
        return truncated_pipeline(h, budget, args.delta, config)
    state = SchemeState.new(h, config)
    for _ in range(budget):
        next_setting(args.scheme, state)
    return state.settings, epsilon_guarantee(h, state.counts, args.delta)


def cmd_generate(args) -> int:
    h = read_hamiltonian(args.hamiltonian)
    budget = check_budget(args.budget)
    settings, report = _settings_for(args, h, budget)
    prov = _provenance(args, h)
    alpha = args.alpha if args.alpha is not None else default_alpha(h)
    header = {
        "scheme": args.scheme,
        "seed": args.seed,
        "delta": args.delta,
        "alpha": repr(float(alpha)),
        "indicator": args.indicator,
        "weight": args.weight,
        "truncate": args.truncate,
        "hamiltonian_hash": prov["hamiltonian_hash"],
        "tool_version": __version__,
        "command_line": prov["command_line"],
    }
    out = Path(args.out)
    report_path = out.with_name(out.name + ".guarantee.json")
    _atomic_write(out, format_settings(settings, header))
    _atomic_write(report_path, _dumps({**prov, "scheme": args.scheme, "budget": budget, "guarantee": report.to_dict()}))
    print(f"wrote {len(settings)} settings to {out} and the guarantee to {report_path}")
    print(f"epsilon_total={report.epsilon_total:.6g} at delta={report.delta}")
    return EXIT_OK


def _parse_checkpoints(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"--checkpoints must be comma-separated integers, got {text!r}") from None
    if not values:
        raise DomainError("--checkpoints is empty")
    return sorted({check_budget(v) for v in values})


def cmd_guarantee_curve(args) -> int:
    h = read_hamiltonian(args.hamiltonian)
    checkpoints = _parse_checkpoints(args.checkpoints)
    prov = _provenance(args, h)
    if args.scheme == "shadowgrouping":
        reports = guarantee_curve(h, checkpoints, args.delta, _scheme_config(args))
    else:
        reports = []
        for n in checkpoints:
            settings, _ = _settings_for(args, h, n)
            reports.append((n, truncated_guarantee(h, count_compatible(h, settings, args.indicator), args.delta)))
    rows = [
        (n, rep.epsilon_stat, rep.epsilon_sys, rep.epsilon_total, len(rep.truncated_indices)) for n, rep in reports
    ]
    lines = [f"# {k}={v}" for k, v in prov.items()]
    lines += [f"# scheme={args.scheme}", f"# delta={args.delta}", f"# l1_norm={norms(h)[0]!r}"]
    lines.append("N,epsilon_stat,epsilon_sys,epsilon_total,n_truncated")
    lines += [f"{n},{s!r},{y!r},{t!r},{k}" for n, s, y, t, k in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {len(rows)} checkpoints to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    h = read_hamiltonian(args.hamiltonian)
    cfg = BenchmarkConfig(
        scheme=args.scheme,
        weight=args.weight,
        indicator=args.indicator,
        alpha=args.alpha,
        epsilon=args.epsilon if args.weight == "derandomization" else None,
        truncate=args.truncate,
        delta=args.delta,
    )
    report = run_benchmark(h, cfg, budget=args.budget, n_runs=args.runs, seed=args.seed)
    payload = {**_provenance(args, h), **report.to_dict()}
    _atomic_write(args.out, _dumps(payload))
    print(f"{report.scheme}: RMSE = {1e3 * report.rmse:.3f} +/- {1e3 * report.rmse_err:.3f} mHa over {report.n_runs} runs")
    return EXIT_OK


def cmd_budget(args) -> int:
    h = read_hamiltonian(args.hamiltonian)
    delta = check_delta(args.delta)
    n_low, n_high = worst_case_budget(h, args.epsilon, delta)
    single = single_shot_budget(h, args.epsilon, delta)
    l1 = norms(h)[0]
    summary = {
        **_provenance(args, h),
        "delta": delta,
        "epsilon": args.epsilon,
        "l1_norm": l1,
        "n_terms": h.n_terms,
        "alpha_delta": alpha_delta(delta),
        "N_low": n_low,
        "N_high": n_high,
        "single_shot_budget": single,
    }
    text = "\n".join(f"{k}: {summary[k]}" for k in summary) + "\n"
    sys.stdout.write(text)
    if args.out:
        _atomic_write(args.out, _dumps(summary))
    return EXIT_OK


def _float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowalloc", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scheme_choices=("shadowgrouping", "random", "bruteforce")):
        p.add_argument("hamiltonian", help="Hamiltonian text file")
        p.add_argument("--delta", type=_float, default=DEFAULT_DELTA)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--scheme", choices=scheme_choices, default="shadowgrouping")
        p.add_argument("--weight", choices=("bernstein", "derandomization"), default="bernstein")
        p.add_argument("--indicator", choices=("qwc", "general"), default="qwc")
        p.add_argument("--alpha", type=_float, default=None)
        p.add_argument("--epsilon", type=_float, default=DEFAULT_EPSILON)
        p.add_argument("--truncate", action="store_true", help="truncated two-phase ShadowGrouping")

    p = sub.add_parser("generate", help="write a settings file and its guarantee report", allow_abbrev=False)
    common(p)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("guarantee-curve", help="guaranteed accuracy versus budget (CSV)", allow_abbrev=False)
    common(p)
    p.add_argument("--checkpoints", default="10,20,50,98,99,100,200,500,1000,2000,5000")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_guarantee_curve)

    p = sub.add_parser("benchmark", help="RMSE of repeated ground-state energy estimates (JSON)", allow_abbrev=False)
    common(p, ("shadowgrouping", "random", "bruteforce", "singleshot"))
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("budget", help="worst-case measurement budget range", allow_abbrev=False)
    p.add_argument("hamiltonian")
    p.add_argument("--delta", type=_float, default=DEFAULT_DELTA)
    p.add_argument("--epsilon", type=_float, default=DEFAULT_EPSILON)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_budget)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        if hasattr(args, "delta"):
            check_delta(args.delta)
        return args.func(args)
    except (FormatError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, StructuralError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
