"""Command line entry point: ``compact-kg {run,study,profile,stability}``.

Exit codes: 0 on success, 1 for configuration errors, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import (
    PROFILE_KEYS,
    _epsilons,
    format_metadata,
    parse_config,
    parse_keyvalues,
    parse_run_config,
)
from .diagnostics import osc_stability_report, stability_report
from .errors import ConfigError, KGError, NumericalError
from .ewi import CACHE_ENV, ReferenceCache
from .grid import PeriodicGrid
from .oscillatory import OscillatoryProblemSpec, Variant, osc_integrate, truncated_domain
from .output import write_energy, write_solution, write_stability, write_text
from .problems import DATA
from .profile import ProfilePlan, emit_profile, profile_preset, run_profile
from .schemes import ProblemSpec, RunConfig, SchemeKind, fit_step, integrate, sigma_of
from .study import preset_plan, run_study

log = logging.getLogger("compact_kg")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _read(path):
    if path is None:
        return ""
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _cache(args):
    directory = args.cache_dir or os.environ.get(CACHE_ENV)
    return ReferenceCache(directory) if directory else None


# -- run / stability -------------------------------------------------------

def build_run(opts: dict):
    """(spec, kind, dt, t_final) from parsed run options."""
    kind = SchemeKind.parse(opts["scheme"])
    eps, p = opts["epsilon"], opts["p"]
    if not 0 < eps <= 1:
        raise ConfigError(f"epsilon must lie in (0, 1], got {eps}")
    if opts["equation"] not in ("standard", "oscillatory"):
        raise ConfigError(f"unknown equation {opts['equation']!r}")
    if opts["domain"] == "whole-space":
        a, b = truncated_domain(eps)
    elif opts["domain"] == "torus":
        a, b = opts["a"], opts["b"]
    else:
        raise ConfigError(f"unknown domain {opts['domain']!r}")
    data = opts["data"] = opts["data"] or ("gaussian" if opts["domain"] == "whole-space" else "trig")
    if data not in DATA:
        raise ConfigError(f"unknown data {data!r}; expected one of {tuple(DATA)}")
    phi, gamma, phi_xx = DATA[data]
    if not opts["h"] > 0:
        raise ConfigError("h must be positive")
    grid = PeriodicGrid.from_mesh_size(a, b, opts["h"])
    t_final = opts["t_final"] if opts["t_final"] is not None else eps ** (-p)
    if not (opts["dt"] > 0 and t_final > 0):
        raise ConfigError("dt and t_final must be positive")
    _, dt = fit_step(t_final, opts["dt"])
    label = f"{data}:{opts['domain']}"
    if opts["equation"] == "oscillatory":
        variant = Variant.WHOLE_SPACE if opts["domain"] == "whole-space" else Variant.TORUS
        spec = OscillatoryProblemSpec(grid, eps, p, phi, gamma, phi_xx, True, label, variant)
    else:
        spec = ProblemSpec(grid, eps, p, phi, gamma, phi_xx, True, label)
    return spec, kind, dt, t_final


def _report_for(spec, kind, dt, sigma):
    if isinstance(spec, OscillatoryProblemSpec):
        return osc_stability_report(spec, kind, dt, sigma)
    return stability_report(spec, kind, dt, sigma)


def _check_stability(report, enforce: bool, what: str):
    if report.stable:
        return
    msg = (f"{what}: semi-implicit step exceeds the linearized stability bound "
           f"{report.condition_bound:.4g}")
    if enforce:
        raise NumericalError(msg)
    log.warning(msg)


def _snapshot_times(text):
    from .config import parse_number

    try:
        return tuple(parse_number(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"snapshots: {exc}") from None


def cmd_run(args) -> int:
    opts = parse_run_config(_read(args.config))
    spec, kind, dt, t_final = build_run(opts)
    if opts["first_step"] not in ("auto", "analytic", "discrete"):
        raise ConfigError(f"unknown first_step {opts['first_step']!r}")
    discrete = {"auto": None, "analytic": False, "discrete": True}[opts["first_step"]]
    cfg = RunConfig(snapshot_times=_snapshot_times(opts["snapshots"]),
                    energy_every=opts["energy_every"], use_discrete_laplacian=discrete)

    sigma0 = sigma_of(spec.initial_values()[0], spec.p)
    _check_stability(_report_for(spec, kind, dt, sigma0), args.enforce_stability, "initial data")
    if isinstance(spec, OscillatoryProblemSpec):
        reg = opts["regularized"]
        if reg not in ("no", "literal", "product"):
            raise ConfigError(f"regularized must be no, literal or product, got {reg!r}")
        traj = osc_integrate(spec, kind, dt, t_final, cfg, regularized=reg != "no",
                             form=reg if reg != "no" else "literal")
    else:
        traj = integrate(spec, kind, dt, t_final, cfg)
    report = _report_for(spec, kind, dt, traj.sigma_max)
    _check_stability(report, args.enforce_stability, "trajectory")

    out = Path(args.out)
    write_solution(out / "solution.csv", traj.final.curr)
    if traj.energy:
        write_energy(out / "energy.csv", traj.energy)
        e0 = traj.energy[0][2]
        drift = max(abs(e - e0) for _, _, e in traj.energy) / abs(e0) if e0 else 0.0
        traj.metadata["energy_relative_drift"] = drift
    for t, u in sorted(traj.snapshots.items()):
        write_solution(out / f"snapshot_t{t:.6g}.csv", u)
    meta = dict(opts)
    meta.update(traj.metadata)
    meta["stable"] = report.stable
    meta["condition_bound"] = report.condition_bound
    write_text(out / "metadata.txt", format_metadata(meta))
    print(f"run: M={spec.grid.M} dt={dt:.6g} steps={traj.final.n} "
          f"sigma_max={traj.sigma_max:.6g} -> {out}")
    return EXIT_OK


def cmd_stability(args) -> int:
    opts = parse_run_config(_read(args.config))
    spec, kind, dt, t_final = build_run(opts)
    if args.sigma_max is not None:
        sigma, source = args.sigma_max, "given"
    else:
        sigma, source = sigma_of(spec.initial_values()[0], spec.p), "initial data"
    report = _report_for(spec, kind, dt, sigma)
    out = Path(args.out)
    write_stability(out / "stability.csv", report)
    meta = {"scheme": kind.value, "M": spec.grid.M, "dt": dt, "epsilon": spec.epsilon, "p": spec.p,
            "sigma_max": sigma, "sigma_source": source,
            "unconditionally_stable": report.unconditionally_stable,
            "condition_bound": report.condition_bound, "stable": report.stable,
            "max_abs_theta": float(max(abs(report.theta)))}
    write_text(out / "stability_metadata.txt", format_metadata(meta))
    print(f"stability: stable={report.stable} unconditional={report.unconditionally_stable} "
          f"bound={report.condition_bound}")
    if args.enforce_stability and not report.stable:
        return EXIT_NUMERICAL
    return EXIT_OK


# -- study / profile -------------------------------------------------------

def cmd_study(args) -> int:
    if args.preset and args.config:
        raise ConfigError("use either --preset or --config, not both")
    if args.preset:
        plan = preset_plan(args.preset, args.full)
    elif args.config:
        plan = parse_config(_read(args.config), full=args.full)
    else:
        raise ConfigError("study needs --config or --preset")
    table = run_study(plan, workers=args.workers, cache=_cache(args))
    out = Path(args.out)
    write_text(out / f"{plan.name}.csv", table.to_csv())
    write_text(out / f"{plan.name}_metadata.txt", format_metadata(table.metadata))
    print(table.format_text())
    failed = [r for r in table.rows if r.status != "ok"]
    for r in failed:
        log.error("eps=%s column %d: %s", r.epsilon_label, r.column, r.status)
    return EXIT_NUMERICAL if failed else EXIT_OK


def parse_profile_config(text: str, preset_name=None):
    """(ProfilePlan, mode) from a key=value file; a preset supplies the defaults."""
    raw = parse_keyvalues(text, PROFILE_KEYS, {}, {"k": "k0", "epsilon": "epsilons"})
    name = raw.pop("preset", preset_name) or "fig1"
    mode = raw.pop("mode", "both")
    if mode not in ("time", "space", "both"):
        raise ConfigError(f"mode must be time, space or both, got {mode!r}")
    base = profile_preset(name)
    kw = {f: getattr(base, f) for f in base.__dataclass_fields__}
    if "epsilons" in raw:
        try:
            kw["epsilon_labels"], kw["epsilons"] = _epsilons(raw.pop("epsilons"))
        except ValueError as exc:
            raise ConfigError(f"epsilons: {exc}") from None
    if raw.get("domain") == "whole-space" and "data" not in raw:
        raw["data"] = "gaussian"
    kw.update(raw)
    if kw["domain"] not in ("torus", "whole-space") or kw["data"] not in DATA:
        raise ConfigError(f"bad domain/data {kw['domain']!r}/{kw['data']!r}")
    SchemeKind.parse(kw["scheme"])
    return ProfilePlan(**kw), mode


def cmd_profile(args) -> int:
    plan, mode = parse_profile_config(_read(args.config), args.preset)
    results = run_profile(plan)
    out = Path(args.out)
    modes = ("time", "space") if mode == "both" else (mode,)
    for m in modes:
        path = emit_profile(results, out / f"profile_{m}.csv", m)
        print(f"profile: wrote {path}")
    return EXIT_OK


# -- plumbing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compact-kg",
        description="Compact finite difference solvers for the Klein-Gordon equation.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", help="key=value configuration file")
        p.add_argument("--out", metavar="DIR", default="out", help="output directory")
        p.add_argument("--enforce-stability", action="store_true",
                       help="fail when the linearized stability bound is violated")

    p = sub.add_parser("run", help="single integration")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("study", help="convergence table")
    common(p)
    p.add_argument("--preset", choices=("table1", "table2", "table3", "table4"))
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.add_argument("--full", action="store_true",
                   help="use the full epsilon range and reference steps (hours of CPU)")
    p.add_argument("--cache-dir", metavar="DIR",
                   help=f"reference cache directory (default: ${CACHE_ENV})")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("profile", help="time series and profiles of the oscillatory solution")
    common(p)
    p.add_argument("--preset", choices=("fig1", "fig2"))
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("stability", help="linearized stability report")
    common(p)
    p.add_argument("--sigma-max", type=float, default=None,
                   help="sigma_max to freeze (default: from the initial data)")
    p.set_defaults(func=cmd_stability)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KGError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
