"""Command-line entry point.

    apsquare <subcommand> [--config path] [--seed u64] [--resolution K] [--out dir] [--tgrid t_min:ratio:L]

Subcommands: validate-kernel, compute, decompose, apchar, experiment <id>.
The exit code is 0 exactly when every asserted check passed.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import BACKEND, __version__
from .config import ConfigError, RunConfig

SUMMARY_HEADER = "apsquare run summary"
# experiments that draw no random numbers and so run without a seed
DETERMINISTIC = {"kernels"}


# --- report emission --------------------------------------------------------------------


def report_dict(outcome, config: RunConfig) -> dict:
    return {
        "experiment": outcome.experiment,
        "passed": outcome.passed,
        "asserted": [
            {"name": c.name, "passed": c.passed, "statement": c.statement, "detail": c.detail}
            for c in outcome.asserted
        ],
        "reported": outcome.reported,
        "scans": [s.to_dict() for s in outcome.scans],
        "config": json.loads(config.to_json()),
    }


def summary_text(outcome) -> str:
    lines = [SUMMARY_HEADER, f"experiment: {outcome.experiment}", ""]
    for c in outcome.asserted:
        tag = "PASS" if c.passed else "FAIL"
        lines.append(f"[{tag}] {c.name}: {c.statement}")
        for k, v in sorted(c.detail.items()):
            lines.append(f"       {k} = {_fmt(v)}")
    if outcome.reported:
        lines.append("")
        lines.append("reported (not asserted):")
        for k, v in sorted(outcome.reported.items()):
            lines.append(f"  {k} = {_fmt(v)}")
    for i, s in enumerate(outcome.scans):
        lines.append("")
        lines.append(f"scan {i}: {s.kind} over {s.param}, slope = {_fmt(s.slope)}, residual = {_fmt(s.residual)}")
        for k, v in sorted(s.meta.items()):
            lines.append(f"  {k} = {_fmt(v)}")
    lines.append("")
    lines.append("result: " + ("all asserted checks passed" if outcome.passed else "asserted checks failed"))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)) and len(v) > 12:
        return f"[{len(v)} values]"
    return str(v)


def emit(outcome, config: RunConfig, formats=("csv", "json", "summary"), outdir=None) -> list[Path]:
    """Write the report bundle; identical inputs give identical bytes."""
    if outcome is None or (not outcome.asserted and not outcome.scans and not outcome.reported):
        raise ValueError("nothing to emit: results are empty")
    out = Path(outdir or config.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        for i, s in enumerate(outcome.scans):
            p = out / f"scan_{i:02d}_{s.kind}.csv"
            p.write_text(s.to_csv())
            written.append(p)
    if "json" in formats:
        p = out / "report.json"
        p.write_text(json.dumps(report_dict(outcome, config), sort_keys=True, indent=2, default=_json_default) + "\n")
        written.append(p)
    if "summary" in formats:
        p = out / "summary.txt"
        p.write_text(summary_text(outcome))
        written.append(p)
    p = out / "config.json"
    p.write_text(config.to_json())
    written.append(p)
    return written


def _json_default(o):
    import numpy as np

    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run(config: RunConfig):
    """Run the configured experiment; returns the outcome."""
    from .cone import TGrid
    from .experiments import run_experiment

    if not config.experiment:
        raise ConfigError("config.experiment: missing")
    config.validate(need_seed=config.experiment.get("id") not in DETERMINISTIC)
    seed = 0 if config.seed is None else config.seed
    params = dict(config.experiment.get("params", {}))
    params.setdefault("J", config.J)
    params.setdefault("K", config.K)
    params.setdefault("kernel", config.kernel["id"])
    if config.tgrid:
        params.setdefault("tgrid", TGrid.parse(config.tgrid))
    return run_experiment(config.experiment["id"], seed, params)


# --- argument handling ----------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="random seed (u64)")
    common.add_argument("--resolution", type=int, metavar="K", help="grid step 2^-K")
    common.add_argument("--out", help="output directory")
    common.add_argument("--tgrid", help="t-grid as t_min:ratio:L")

    ap = argparse.ArgumentParser(prog="apsquare", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"apsquare {__version__} ({BACKEND} backend)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    vk = sub.add_parser("validate-kernel", parents=[common], help="check a kernel against the decay/smoothness bounds")
    vk.add_argument("--kernel", default=None, help="haar, mexican_hat or box")
    vk.add_argument("--range", type=float, default=64.0, help="probe radius R")

    cp = sub.add_parser("compute", parents=[common], help="apply an operator to a signal file")
    cp.add_argument("--input", required=True, help="signal CSV or binary file")
    cp.add_argument("--op", required=True, choices=["S_alpha", "S_tilde", "gstar", "M", "sharp"])
    cp.add_argument("--kernel", default=None)
    cp.add_argument("--alpha", type=float, default=1.0)
    cp.add_argument("--mu", type=float, default=2.0)
    cp.add_argument("--root", default="0:0", help="root cube level:index[,index] for 'sharp'")
    cp.add_argument("--lambda", dest="lam", default="auto")

    dc = sub.add_parser("decompose", parents=[common], help="local mean oscillation decomposition")
    dc.add_argument("--input", required=True)
    dc.add_argument("--root", required=True, help="root cube as level:index[,index]")
    dc.add_argument("--lambda", dest="lam", default="auto", help="'auto' = 2^-(n+2)")

    ac = sub.add_parser("apchar", parents=[common], help="A_p characteristic of a weight file")
    ac.add_argument("--input", required=True)
    ac.add_argument("--p", type=float, required=True)
    ac.add_argument("--scope", choices=["all", "dyadic", "shifted"], default="all")

    ex = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    ex.add_argument("id", nargs="?", help="experiment id (overrides the config)")
    ex.add_argument("--param", action="append", default=[], metavar="KEY=JSON",
                    help="experiment parameter override, e.g. trials=5")
    ex.add_argument("--list", action="store_true", help="list experiment ids and exit")
    return ap


def _config_from(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.resolution is not None:
        cfg.K = args.resolution
    if args.out is not None:
        cfg.out = args.out
    if args.tgrid is not None:
        cfg.tgrid = args.tgrid
    if getattr(args, "kernel", None):
        cfg.kernel = {"id": args.kernel}
    return cfg


def _load_signal(path):
    from .io import load_binary, load_csv

    path = Path(path)
    return load_csv(path) if path.suffix.lower() == ".csv" else load_binary(path)


def _parse_cube(text: str, n: int):
    from .geometry import Cube

    try:
        level, idx = text.split(":")
        index = tuple(int(i) for i in idx.split(","))
    except ValueError:
        raise ConfigError(f"--root: expected level:index[,index], got {text!r}") from None
    if len(index) != n:
        raise ConfigError(f"--root: expected {n} indices")
    return Cube(0, int(level), index)


def _lam(text: str, n: int) -> float:
    return 2.0 ** -(n + 2) if text == "auto" else float(text)


def _write_json(obj, outdir: Path, name: str) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / name).write_text(text)
    sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ValueError, OSError, KeyError) as exc:
        print(f"apsquare: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cfg = _config_from(args)
    out = Path(cfg.out)

    if args.cmd == "validate-kernel":
        from .kernels import get_kernel, validate_kernel

        cfg.validate(need_seed=False)
        rep = validate_kernel(get_kernel(cfg.kernel["id"]), R=args.range)
        _write_json({"kernel": cfg.kernel["id"], **rep.as_dict()}, out, "kernel_report.json")
        return 0 if rep.eps_ok else 1

    if args.cmd == "compute":
        from .cone import TGrid, conv_field, cone_square, default_tgrid, gstar, smooth_square
        from .io import save_csv
        from .kernels import BumpSpec, get_kernel
        from .signal import hl_maximal, local_sharp_max

        f = _load_signal(args.input)
        if args.op == "M":
            g = hl_maximal(f)
        elif args.op == "sharp":
            g = local_sharp_max(f, _parse_cube(args.root, f.domain.n), _lam(args.lam, f.domain.n))
        else:
            tg = TGrid.parse(cfg.tgrid) if cfg.tgrid else default_tgrid(f.domain)
            F = conv_field(f, get_kernel(cfg.kernel["id"]), tg)
            if args.op == "S_alpha":
                g = cone_square(F, args.alpha, exact=False)
            elif args.op == "S_tilde":
                g = smooth_square(F, BumpSpec(), args.alpha, exact=False)
            else:
                g = gstar(F, args.mu, exact=False)
        out.mkdir(parents=True, exist_ok=True)
        save_csv(g, out / f"{args.op}.csv")
        print(out / f"{args.op}.csv")
        return 0

    if args.cmd == "decompose":
        from .sparse import lmo_decompose, verify_sparse

        f = _load_signal(args.input)
        q0 = _parse_cube(args.root, f.domain.n)
        fam, med = lmo_decompose(f, q0, _lam(args.lam, f.domain.n))
        cert = verify_sparse(fam)
        out.mkdir(parents=True, exist_ok=True)
        text = fam.to_json(certificate=cert)
        (out / "family.json").write_text(text + "\n")
        print(text)
        return 0 if cert["pass"] else 1

    if args.cmd == "apchar":
        from .signal import Weight, ap_char

        f = _load_signal(args.input)
        res = ap_char(Weight(f.domain, f.values), args.p, args.scope)
        box = res.region
        _write_json({"p": args.p, "scope": args.scope, "value": res.value,
                     "cube": {"lo": [str(v) for v in box.lo], "hi": [str(v) for v in box.hi]}},
                    out, "apchar.json")
        return 0

    if args.cmd == "experiment":
        from .experiments import EXPERIMENTS

        if args.list:
            print("\n".join(sorted(EXPERIMENTS)))
            return 0
        if args.id:
            cfg.experiment = {"id": args.id, "params": dict(cfg.experiment.get("params", {}))}
        for item in args.param:
            key, _, val = item.partition("=")
            if not key or not val:
                raise ConfigError(f"--param: expected KEY=JSON, got {item!r}")
            cfg.experiment.setdefault("params", {})[key] = json.loads(val)
        outcome = run(cfg)
        emit(outcome, cfg)
        for c in outcome.asserted:
            print(f"{'PASS' if c.passed else 'FAIL'} {outcome.experiment}.{c.name}")
        print(f"({outcome.seconds:.2f} s, {BACKEND} backend) -> {out}", file=sys.stderr)
        return 0 if outcome.passed else 1

    raise AssertionError(args.cmd)


if __name__ == "__main__":
    sys.exit(main())
