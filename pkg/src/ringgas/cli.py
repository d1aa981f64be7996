"""Batch command-line front end.

Every command writes its data files (CSV series plus a JSON summary) and a
``manifest.json`` into ``--out``.  Data files depend only on the parameters,
so repeating a run, or replaying its manifest with ``ringgas replay``,
reproduces them byte for byte.  The manifest additionally records the wall
clock duration and therefore differs between runs.

CSV schemas::

    densities.csv   t,i,rho
    trajectory.csv  t,i,rho_hat,mass
    histogram.csv   period,count
    spans.csv       orbit,k,i,period,span
    flux.csv        t,i,Xr,Xl,Xhr,Xhl,res_a,res_b
    ensemble.csv    i,t,mean,var,freq,rho_hat,env_cheb,env_var
    scan.csv        R,max_freq,freq_radius,max_union_freq,env_cheb

Reals are written with 17 significant digits.  Exit codes: 0 success,
1 usage error, 2 a verification check failed.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, rng
from .diffusion import (
    DiffusionParams, flux_counts, molecular_chaos_residual, solve_diffusion,
    verify_flux_identity,
)
from .ensemble import EnsembleConfig, lln_convergence_scan, run_ensemble, scan_is_nonincreasing
from .lattice import Geometry, ring_counts_at, sample_initial, sample_scatterers, step
from .orbits import generate_anomalous_field, loop_decomposition, period_histogram, ring_span

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def csv_text(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def parse_profile(spec, N):
    """Turn a profile spec into ``2N + 1`` ring densities.

    Accepted forms: ``const:p``; ``step:a,b`` (rings ``i <= 0`` get ``a``,
    the rest ``b``); ``linear:a,b`` (affine from ring ``-N`` to ring ``N``);
    ``file:PATH`` (comma or newline separated values).
    """
    kind, sep, body = spec.partition(":")
    if not sep:
        raise ValueError(f"malformed profile spec {spec!r}")
    i = np.arange(-N, N + 1)
    try:
        if kind == "file":
            text = Path(body).read_text()
            values = np.array([float(v) for v in text.replace("\n", ",").split(",") if v.strip()])
            if values.shape != (2 * N + 1,):
                raise ValueError(f"profile file holds {values.size} values, expected {2 * N + 1}")
        else:
            nums = [float(v) for v in body.split(",")]
            if kind == "const" and len(nums) == 1:
                values = np.full(2 * N + 1, nums[0])
            elif kind == "step" and len(nums) == 2:
                values = np.where(i <= 0, nums[0], nums[1]).astype(float)
            elif kind == "linear" and len(nums) == 2:
                frac = (i + N) / (2 * N) if N else np.zeros(1)
                values = nums[0] + (nums[1] - nums[0]) * frac
            else:
                raise ValueError(f"malformed profile spec {spec!r}")
    except (OSError, TypeError) as exc:
        raise ValueError(f"cannot read profile {spec!r}: {exc}") from exc
    if not np.all(np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
        raise ValueError(f"profile {spec!r} has values outside [0, 1]")
    return values


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _probability(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return v


def _seed_pair(seed):
    return (rng.mix_seed(seed, 0, rng.SCATTERERS), rng.mix_seed(seed, 0, rng.OCCUPATIONS))


def cmd_simulate(args):
    g = Geometry(args.R, args.N)
    profile = parse_profile(args.init, g.N)
    field_seed, state_seed = _seed_pair(args.seed)
    field = sample_scatterers(g, args.mu, field_seed)
    state = sample_initial(g, profile, state_seed)
    counts = ring_counts_at(state, field, range(args.steps + 1))
    rows = [(t, i, counts[t, col] / g.R)
            for t in range(args.steps + 1) for col, i in enumerate(g.ring_indices())]
    initial, final = int(counts[0].sum()), int(counts[-1].sum())
    summary = {"popcount_initial": initial, "popcount_final": final,
               "conserved": initial == final}
    files = {"densities.csv": csv_text(["t", "i", "rho"], rows)}
    return files, summary, EXIT_OK if initial == final else EXIT_CHECK


def cmd_orbits(args):
    g = Geometry(args.R, args.N)
    if args.pattern:
        params = {k: getattr(args, k) for k in ("k0", "i0", "stride", "offset")
                  if getattr(args, k) is not None}
        field = generate_anomalous_field(g, args.pattern, **params)
    else:
        field = sample_scatterers(g, args.mu, _seed_pair(args.seed)[0])
    dec = loop_decomposition(field)
    hist = period_histogram(dec)
    periods = dec.periods()
    lo, hi = g.R, g.R * g.rings
    ok = (all(lo <= p <= hi and p % g.R == 0 for p in periods)
          and sum(periods) == g.size)
    spans = [(n, o.sites[0].k, o.sites[0].i, o.period, ring_span(o))
             for n, o in enumerate(dec.orbits)]
    summary = {
        "orbits": len(periods), "min_period": min(periods), "max_period": max(periods),
        "period_bounds": [lo, hi], "bounds_check": "pass" if ok else "fail",
        "max_ring_span": max(s[-1] for s in spans),
    }
    files = {
        "histogram.csv": csv_text(["period", "count"], hist.items()),
        "spans.csv": csv_text(["orbit", "k", "i", "period", "span"], spans),
    }
    return files, summary, EXIT_OK if ok else EXIT_CHECK


def cmd_diffusion(args):
    params = DiffusionParams(args.mu, args.N, args.variant)
    traj = solve_diffusion(parse_profile(args.init, args.N), params, args.steps)
    mass = traj.sum(axis=1)
    rows = [(t, i - args.N, traj[t, i], mass[t])
            for t in range(args.steps + 1) for i in range(2 * args.N + 1)]
    summary = {"mass_initial": float(mass[0]), "mass_final": float(mass[-1]),
               "max_mass_change_per_step": float(np.abs(np.diff(mass)).max(initial=0.0))}
    return {"trajectory.csv": csv_text(["t", "i", "rho_hat", "mass"], rows)}, summary, EXIT_OK


def cmd_boltzmann(args):
    g = Geometry(args.R, args.N)
    field_seed, state_seed = _seed_pair(args.seed)
    field = sample_scatterers(g, args.mu, field_seed)
    state = sample_initial(g, parse_profile(args.init, g.N), state_seed)
    rows = []
    worst = 0
    for t in range(args.steps + 1):
        counts = flux_counts(state, field)
        for col, i in enumerate(range(-g.N, g.N)):
            a, b = molecular_chaos_residual(state, field, i, args.mu, allow_boundary=True)
            rows.append((t, i, counts.x_right[col], counts.x_left[col],
                         counts.xhat_right[col], counts.xhat_left[col], a, b))
        if t < args.steps:
            nxt = step(state, field)
            worst = max(worst, int(np.abs(verify_flux_identity(state, nxt, field)).max()))
            state = nxt
    ok = worst == 0
    summary = {"identity_check": "pass" if ok else "fail", "max_abs_residual": worst}
    header = ["t", "i", "Xr", "Xl", "Xhr", "Xhl", "res_a", "res_b"]
    return {"flux.csv": csv_text(header, rows)}, summary, EXIT_OK if ok else EXIT_CHECK


def cmd_ensemble(args):
    g = Geometry(args.R, args.N)
    config = EnsembleConfig(
        geometry=g, mu=args.mu, initial_profile=tuple(parse_profile(args.init, g.N)),
        replicas=args.replicas, times=tuple(args.times), epsilon=args.epsilon,
        alpha=args.alpha, master_seed=args.seed,
    )
    report = run_ensemble(config, threads=args.threads)
    ok = report.passed()
    paper_gap = np.abs(report.mean - report.rho_hat_paper)
    flux_gap = np.abs(report.mean - report.rho_hat)
    summary = {
        "replicas": report.replicas,
        "variance_check": "pass" if report.variance_check().all() else "fail",
        "chebyshev_check": "pass" if report.chebyshev_check().all() else "fail",
        "mean_within_4se": bool(report.mean_check().all()),
        "max_mean_gap_flux": float(flux_gap.max()),
        "max_mean_gap_paper": float(paper_gap.max()),
        "union_freq": {str(t): float(f) for t, f in zip(report.times, report.union_freq)},
        "env_cheb": report.env_cheb,
        "warnings": report.warnings,
    }
    header = ["i", "t", "mean", "var", "freq", "rho_hat", "env_cheb", "env_var"]
    files = {"ensemble.csv": csv_text(header, report.to_rows())}
    if args.scan_R:
        rows = lln_convergence_scan(config, args.scan_R, threads=args.threads)
        trend = scan_is_nonincreasing(rows)
        below = all(r.below_envelope for r in rows)
        ok = ok and trend and below
        summary["scan"] = {"nonincreasing": trend, "below_envelope": below}
        files["scan.csv"] = csv_text(
            ["R", "max_freq", "freq_radius", "max_union_freq", "env_cheb"],
            [(r.R, r.max_freq, r.max_freq_radius, r.max_union_freq, r.envelope) for r in rows])
    return files, summary, EXIT_OK if ok else EXIT_CHECK


COMMANDS = {
    "simulate": cmd_simulate,
    "orbits": cmd_orbits,
    "diffusion": cmd_diffusion,
    "ensemble": cmd_ensemble,
    "boltzmann": cmd_boltzmann,
}

# parameters that never influence data files
_NON_DATA = {"out", "threads", "command"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="ringgas", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, lattice=True):
        p.add_argument("--out", required=True, type=Path, help="output directory")
        if lattice:
            p.add_argument("--R", type=int, required=True, help="sites per ring")
        p.add_argument("--N", type=int, required=True, help="rings run from -N to N")

    p = sub.add_parser("simulate", help="evolve one random instance, write ring densities")
    common(p)
    p.add_argument("--mu", type=_probability, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--init", default="const:0.5")

    p = sub.add_parser("orbits", help="loop decomposition, period histogram, ring spans")
    common(p)
    p.add_argument("--mu", type=_probability, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pattern", choices=["isolated", "single-column", "diagonal"])
    p.add_argument("--k0", type=int)
    p.add_argument("--i0", type=int)
    p.add_argument("--stride", type=int)
    p.add_argument("--offset", type=int)

    p = sub.add_parser("diffusion", help="iterate the discrete diffusion solver")
    common(p, lattice=False)
    p.add_argument("--mu", type=_probability, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--init", required=True)
    p.add_argument("--variant", choices=["paper", "flux"], default="flux")

    p = sub.add_parser("ensemble", help="Monte Carlo ensemble against the diffusion solver")
    common(p)
    p.add_argument("--mu", type=_probability, required=True)
    p.add_argument("--init", required=True)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--times", type=_int_list, required=True)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--scan-R", type=_int_list, dest="scan_R",
                   help="also run the convergence scan over these ring lengths")

    p = sub.add_parser("boltzmann", help="flux counts, exact balance, closure residuals")
    common(p)
    p.add_argument("--mu", type=_probability, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--init", default="const:0.5")

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, help="output directory (default: the recorded one)")
    return parser


def _validate(args):
    for name in ("R", "steps", "replicas", "threads"):
        value = getattr(args, name, None)
        if value is not None and value < (1 if name != "steps" else 0):
            raise UsageError(f"--{name} must be {'non-negative' if name == 'steps' else 'positive'}")
    if getattr(args, "N", 0) < 0:
        raise UsageError("--N must be non-negative")


def _write_outputs(out, files):
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            tmp = out / f".{name}.tmp"
            tmp.write_text(text)
            staged.append((tmp, out / name))
    except OSError:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)


def run(args):
    """Execute parsed ``args``; returns the exit code."""
    _validate(args)
    started = time.perf_counter()
    params = {k: (str(v) if isinstance(v, Path) else v)
              for k, v in sorted(vars(args).items()) if k != "command"}
    try:
        files, summary, code = COMMANDS[args.command](args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data_params = {k: v for k, v in params.items() if k not in _NON_DATA}
    summary = {"command": args.command, "parameters": data_params, "version": __version__,
               "result": summary, "exit_code": code}
    files["summary.json"] = json_text(summary)
    manifest = {
        "command": args.command,
        "parameters": params,
        "master_seed": params.get("seed"),
        "version": __version__,
        "wall_clock_seconds": time.perf_counter() - started,
        "outputs": sorted(str(args.out / name) for name in list(files) + ["manifest.json"]),
    }
    files["manifest.json"] = json_text(manifest)
    _write_outputs(args.out, files)
    return code


def _replay_args(parser, manifest_path, out):
    manifest = json.loads(Path(manifest_path).read_text())
    argv = [manifest["command"]]
    for key, value in manifest["parameters"].items():
        if value is None or value is False:
            continue
        if key == "out" and out is not None:
            value = str(out)
        flag = "--scan-R" if key == "scan_R" else f"--{key}"
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        argv += [flag, str(value)]
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        if args.command == "replay":
            try:
                args = _replay_args(parser, args.manifest, args.out)
            except SystemExit as exc:
                return exc.code
        return run(args)
    except (UsageError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"ringgas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
