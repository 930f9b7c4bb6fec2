"""Command-line interface: ``roughhurst {simulate,estimate,mc,rate}``.

Exit codes: 0 success, 2 usage or configuration error, 3 degenerate data,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path


from . import __version__
from .errors import ConfigError, RoughHurstError
from .estimator import SeqEstimatorConfig, r_seq
from .experiments import (
    THREADS_ENV,
    McConfig,
    box_stats,
    rate_fit,
    rate_fit_from_rmse,
    run_mc,
    write_estimates_csv,
)
from .pathio import read_path_csv, write_path_csv
from .plotting import boxplot_svg
from .processes import TRANSFORMS, FouSpec, Transform, build_drifted_fbm, build_fou, integrate_transform
from .sim import Method, simulate_fbm

log = logging.getLogger("roughhurst")

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_NUMERICAL = 0, 2, 3, 4


def _levels(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a..b' or a comma list, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty level list {text!r}")
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def shipped_configs() -> list[str]:
    return sorted(p.name for p in resources.files("roughhurst.configs").iterdir() if p.name.endswith(".json"))


def load_config(name: str | None) -> McConfig:
    """Read a JSON config from a path, or by name from the shipped configs."""
    if name is None:
        return McConfig()
    p = Path(name)
    if p.exists():
        text = p.read_text()
    elif name in shipped_configs():
        text = resources.files("roughhurst.configs").joinpath(name).read_text()
    else:
        raise ConfigError(f"config {name!r} not found (shipped: {', '.join(shipped_configs())})")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{name}: invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: top level must be an object")
    return McConfig.from_dict(data)


def _apply_overrides(cfg: McConfig, args) -> McConfig:
    changes = {}
    for key, attr in (
        ("paths", "paths"),
        ("seed0", "seed0"),
        ("hurst", "hurst_list"),
        ("levels", "n_levels"),
        ("g", "transform"),
        ("q", "oversample_q"),
        ("backend", "backend"),
    ):
        v = getattr(args, key, None)
        if v is not None:
            changes[attr] = v
    return cfg.replace(**changes) if changes else cfg


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True)


# ---------------------------------------------------------------- simulate


def cmd_simulate(args, parser) -> int:
    if args.model == "dfbm" and (args.rho is not None or args.mu is not None):
        parser.error("--rho/--mu apply to --model fou only")
    if args.model == "fou" and args.drift is not None:
        parser.error("--drift applies to --model dfbm only")
    if (args.transform is None) != (args.target_level is None):
        parser.error("--transform and --target-level must be given together")
    if args.transform is not None and args.y_out is None:
        parser.error("--transform needs --y-out for the integrated path")
    if args.target_level is not None and not 0 <= args.target_level <= args.level:
        parser.error("--target-level must lie in [0, --level]")

    fbm = simulate_fbm(args.level, args.hurst, args.seed, args.backend)
    if args.model == "fou":
        spec = FouSpec(args.x0, args.rho or 0.0, args.mu or 0.0, args.hurst)
        if not spec.in_rough_regime:
            log.warning("H=%s >= 1/2 lies outside the rough fOU volatility model", args.hurst)
        x = build_fou(spec, fbm)
    else:
        x = build_drifted_fbm(args.x0, args.drift, fbm)
    write_path_csv(x, args.out)
    if args.transform is not None:
        ip = integrate_transform(
            x, Transform.by_name(args.transform), args.target_level, args.level - args.target_level
        )
        write_path_csv(ip.y, args.y_out)
    return EXIT_OK


# ---------------------------------------------------------------- estimate


def cmd_estimate(args, parser) -> int:
    m = args.m
    alphas = args.alphas
    if alphas is None:
        alphas = [1.0] * (m + 1)
    elif len(alphas) != m + 1:
        parser.error(f"--alphas needs m + 1 = {m + 1} values, got {len(alphas)}")
    cfg = SeqEstimatorConfig(m, tuple(alphas))
    y = read_path_csv(args.input)
    rep = r_seq(y, args.n, cfg)
    d = rep.to_dict()
    d["input"] = str(args.input)
    if args.format == "json":
        print(_dump(d))
    else:
        print(f"input        {args.input}")
        print(f"n            {rep.n}")
        print(f"m, alphas    {cfg.m}, {', '.join(f'{a:g}' for a in cfg.alphas)}")
        for k, v in sorted(rep.r_hat_levels.items()):
            print(f"r_hat[{k:>2}]    {v:.12g}")
        print(f"lambda_star  {rep.lambda_star:.12g}")
        print(f"eta_seq      {rep.eta_seq:.12g}")
        print(f"r_seq        {rep.r_seq:.12g}")
    return EXIT_OK


# ---------------------------------------------------------------- mc


def cmd_mc(args, parser) -> int:
    if args.print_defaults:
        print(_dump(McConfig().to_dict()))
        return EXIT_OK
    if args.out_dir is None:
        parser.error("--out-dir is required")
    cfg = _apply_overrides(load_config(args.config), args)
    res = run_mc(cfg, threads=args.threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_estimates_csv(res.rows, out / "estimates.csv")
    stats = box_stats(res.rows)
    doc = {
        "config": cfg.to_dict(),
        "counts": res.counts,
        "notes": res.notes,
        "stats": [s.to_dict() for s in stats],
    }
    (out / "boxstats.json").write_text(_dump(doc) + "\n")
    title = f"sequential scale estimates, g={cfg.transform}, {cfg.model}, {cfg.paths} paths"
    (out / "boxplot.svg").write_text(boxplot_svg(stats, title=title))
    for note in res.notes:
        log.info("note: %s", note)
    for s in stats:
        log.info(
            "H=%g n=%d median=%.4f IQR=%.4f rmse=%.4f (count %d)",
            s.hurst, s.n, s.median, s.iqr, s.rmse_vs_H, s.count,
        )
    return EXIT_OK


# ---------------------------------------------------------------- rate


def _synthetic_rmse(expr: str, levels: list[int]) -> list[float]:
    import sympy

    n = sympy.Symbol("n")
    try:
        f = sympy.sympify(expr, locals={"n": n}, convert_xor=True)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"cannot parse synthetic expression {expr!r}: {exc}") from None
    if f.free_symbols - {n}:
        raise ConfigError(f"synthetic expression may only use 'n', got {sorted(map(str, f.free_symbols))}")
    return [float(f.subs(n, k)) for k in levels]


def cmd_rate(args, parser) -> int:
    if args.print_defaults:
        print(_dump(McConfig.from_dict(json.loads(
            resources.files("roughhurst.configs").joinpath("rate_identity_h03.json").read_text()
        )).to_dict()))
        return EXIT_OK
    if args.levels is None:
        parser.error("--levels is required (e.g. --levels 8..13)")
    if args.synthetic is not None:
        levels = args.levels
        rmse = _synthetic_rmse(args.synthetic, levels)
        fit = rate_fit_from_rmse(levels, rmse)
        doc = fit.to_dict()
        doc["synthetic"] = args.synthetic
    else:
        cfg = _apply_overrides(load_config(args.config or "rate_identity_h03.json"), args)
        if len(cfg.hurst_list) != 1:
            raise ConfigError(f"rate fits one H at a time, config has {list(cfg.hurst_list)}")
        res = run_mc(cfg, threads=args.threads)
        stats = box_stats(res.rows)
        fit = rate_fit(stats)
        levels = list(fit.levels)
        rmse = [s.rmse_vs_H for s in sorted(stats, key=lambda s: s.n)]
        doc = fit.to_dict()
        doc.update(hurst=cfg.hurst_list[0], paths=cfg.paths, transform=cfg.transform, counts=res.counts)
    with open(args.out, "w") as fh:
        fh.write("n,rmse\n")
        fh.writelines(f"{k},{v:.17g}\n" for k, v in zip(levels, rmse))
    print(_dump(doc))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roughhurst", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate X (and optionally Y) to CSV")
    s.add_argument("--model", choices=("fou", "dfbm"), required=True)
    s.add_argument("--hurst", type=float, required=True)
    s.add_argument("--x0", type=float, default=0.0)
    s.add_argument("--rho", type=float)
    s.add_argument("--mu", type=float)
    s.add_argument("--drift", type=float, help="constant drift (dfbm only)")
    s.add_argument("--level", type=int, required=True, help="simulation grid level L (2^L + 1 points)")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--backend", choices=[m.value for m in Method], default=Method.CIRCULANT.value)
    s.add_argument("--out", required=True, help="CSV file for X")
    s.add_argument("--transform", choices=sorted(TRANSFORMS))
    s.add_argument("--target-level", type=int, help="observation level of Y (oversampling = level - target)")
    s.add_argument("--y-out", help="CSV file for Y")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", help="estimate the roughness exponent from a Y path CSV")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m", type=int, default=3)
    e.add_argument("--alphas", type=_floats, help="comma-separated alpha_0..alpha_m (default all ones)")
    e.add_argument("--format", choices=("json", "text"), default="json")
    e.set_defaults(func=cmd_estimate)

    def mc_common(sp):
        sp.add_argument("--config", help="JSON config path or shipped name: " + ", ".join(shipped_configs()))
        sp.add_argument("--paths", type=int)
        sp.add_argument("--seed0", type=int)
        sp.add_argument("--hurst", type=_floats, help="comma-separated Hurst values")
        sp.add_argument("--q", type=int, help="oversampling levels")
        sp.add_argument("--backend", choices=[m.value for m in Method])
        sp.add_argument("--threads", type=int, help=f"worker processes (default ${THREADS_ENV} or 1)")
        sp.add_argument("--print-defaults", action="store_true")

    m = sub.add_parser("mc", help="Monte Carlo study: estimates.csv, boxstats.json, boxplot.svg")
    mc_common(m)
    m.add_argument("--levels", type=_levels)
    m.add_argument("--g", choices=sorted(TRANSFORMS))
    m.add_argument("--out-dir")
    m.set_defaults(func=cmd_mc)

    r = sub.add_parser("rate", help="fit the RMSE decay slope across levels")
    mc_common(r)
    r.add_argument("--levels", type=_levels)
    r.add_argument("--g", choices=sorted(TRANSFORMS))
    r.add_argument("--synthetic", help="rmse as an expression in n, e.g. '2^(-n/2)'")
    r.add_argument("--out", default="rate.csv")
    r.set_defaults(func=cmd_rate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return args.func(args, sub)
    except RoughHurstError as exc:
        print(f"roughhurst {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
