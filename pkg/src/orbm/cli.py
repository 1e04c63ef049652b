"""Batch command-line front end.

Every run is fully determined by (config, seed): numeric outputs reproduce
byte-identically on one platform.  Each output directory receives a manifest
with the config hash, enough to re-run the experiment.

Exit codes: 0 success, 2 config error, 3 numeric inconclusive,
4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import conformal, disk, erbm, harmonic, io as oio, svg
from .config import DEFAULT, Tolerances
from .errors import ConfigError, InternalConsistencyFailure, OrbmError
from .harmonic import BoundaryField, FieldKind
from .quadrature import Verdict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCONCLUSIVE = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

def build_theta(spec: dict, n_grid: int) -> BoundaryField:
    """Angle fields from the small tagged expression set."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("theta spec must be an object with a 'kind' tag")
    kind = spec["kind"]
    if kind == "constant":
        return BoundaryField.constant(float(spec["value"]), n_grid)
    if kind == "fourier":
        return BoundaryField.fourier(spec.get("sin", ()), spec.get("cos", ()),
                                     float(spec.get("mean", 0.0)), n_grid)
    if kind == "semicircle_split":
        return BoundaryField.semicircle_split(n_grid)
    if kind == "clamp":
        inner = build_theta(spec["inner"], n_grid)
        return inner.clamp(float(spec["limit"]))
    raise ConfigError(f"unknown theta kind {kind!r}")


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            cfg = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def tolerances_from(cfg: dict) -> Tolerances:
    base = dict(cfg.get("tolerances", {}))
    for key in ("n_grid", "n_modes"):
        if key in cfg:
            base[key] = cfg[key]
    try:
        return Tolerances.from_dict({**DEFAULT.to_dict(), **base})
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e


def _cfg(cfg: dict, key: str, default=None, required: bool = False):
    if key in cfg:
        return cfg[key]
    if required:
        raise ConfigError(f"config key {key!r} is required for this command")
    return default


def write_manifest(out: Path, command: str, cfg: dict, seed: int, outputs: list):
    digest = hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()
    oio.dump_json({
        "command": command,
        "config_sha256": digest,
        "config": cfg,
        "seed": seed,
        "version": __version__,
        "outputs": sorted(outputs),
    }, out / "manifest.json")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_correspond(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    pair = harmonic.angle_to_pair(theta, tol)
    mu = harmonic.rotation_field(pair, tol)
    result = {
        "rotation_number": pair.rotation,
        "density": pair.density.to_dict(),
        "rotation_field": mu.fn.to_dict(),
        "theta": theta.to_dict(),
    }
    try:
        back = harmonic.pair_to_angle(pair, theta.n_grid, tol)
        result["round_trip_sup_error"] = float(np.max(np.abs(back.values - theta.values)))
    except OrbmError as e:
        result["round_trip_sup_error"] = None
        result["round_trip_note"] = str(e)
    oio.dump_json(result, out / "correspond.json")
    t = theta.angles
    svg.line_chart(t, [theta.values, pair.density.boundary(theta.n_grid, 1 - tol.eps_bdry)],
                   str(out / "boundary_fields.svg"), labels=["angle", "density"])
    return ["correspond.json", "boundary_fields.svg"], EXIT_OK


def cmd_simulate(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    dt = float(_cfg(cfg, "dt", 1e-3))
    T = float(_cfg(cfg, "horizon", 10.0))
    x0 = complex(*_cfg(cfg, "x0", [0.3, 0.0]))
    path = disk.simulate(theta, x0, dt, T, seed)
    path.check_invariants()
    outputs = []
    if fmt in ("csv",):
        oio.write_path_csv(path, out / "path.csv")
        outputs.append("path.csv")
    else:
        oio.write_path_bin(path, out / "path.bin")
        outputs.append("path.bin")
    svg.path_trace(path.positions, str(out / "path.svg"))
    outputs.append("path.svg")
    oio.dump_json({"final": [path.positions[-1].real, path.positions[-1].imag],
                   "local_time": float(path.local_time[-1]),
                   "rejected_steps": path.rejected_steps,
                   "seed": seed}, out / "summary.json")
    outputs.append("summary.json")
    return outputs, EXIT_OK


def _stationary_chunk(args):
    (theta_dict, dt, n_steps, nr, nt, chunk_seed) = args
    theta = BoundaryField.from_dict(theta_dict)
    hist = disk.occupation_stream(theta, 0.3, dt, n_steps, chunk_seed, nr=nr, nt=nt)
    return hist.weights


def cmd_verify_stationary(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    dt = float(_cfg(cfg, "dt", 2.5e-3))
    n_steps = int(_cfg(cfg, "steps", 2_000_000))
    nr = int(_cfg(cfg, "nr", 8))
    nt = int(_cfg(cfg, "nt", 8))
    pair = harmonic.angle_to_pair(theta, tol)
    chunks = max(1, min(workers, 16))
    seeds = [int(s.generate_state(1)[0]) for s in
             np.random.SeedSequence(seed).spawn(chunks)]
    args = [(theta.to_dict(), dt, n_steps // chunks, nr, nt, s) for s in seeds]
    if chunks > 1:
        with ProcessPoolExecutor(max_workers=chunks) as ex:
            parts = list(ex.map(_stationary_chunk, args))
    else:
        parts = [_stationary_chunk(args[0])]
    hist = disk.PolarHistogram.empty(nr, nt)
    for w in parts:
        hist.weights += w
    hist.total = math.fsum(float(w.sum()) for w in parts)
    l1 = hist.l1_error(pair.density)
    oio.dump_json(oio.histogram_report(hist, l1, seed), out / "stationary.json")
    svg.polar_heatmap(hist.weights, str(out / "density.svg"))
    threshold = float(_cfg(cfg, "l1_threshold", 0.05))
    return (["stationary.json", "density.svg"],
            EXIT_OK if l1 < threshold else EXIT_INTERNAL)


def cmd_rotation(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    dt = float(_cfg(cfg, "dt", 5e-4))
    T = float(_cfg(cfg, "horizon", 500.0))
    z = complex(*_cfg(cfg, "about", [0.0, 0.0]))
    from .paths import rotation_rate
    path = disk.simulate(theta, 0.3, dt, T, seed)
    est = rotation_rate(path, z)
    pair = harmonic.angle_to_pair(theta, tol)
    mu = harmonic.rotation_field(pair, tol)
    predicted = float(mu(z))
    oio.dump_json({"estimate": est.value, "stderr": est.stderr,
                   "predicted": predicted,
                   "within_3_sigma": bool(abs(est.value - predicted) <= 3 * est.stderr),
                   "removed_windings": est.removed_windings,
                   "seed": seed}, out / "rotation.json")
    return ["rotation.json"], EXIT_OK


def cmd_cauchy(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    t_values = _cfg(cfg, "t_values", [50.0, 200.0])
    replicas = int(_cfg(cfg, "replicas", 2000))
    dt = float(_cfg(cfg, "dt", 2e-3))
    rep = disk.cauchy_limit_test(theta, t_values, replicas, seed, dt)
    oio.dump_json({"t_values": rep.t_values, "ks": rep.ks_distances,
                   "p_values": rep.p_values, "rotation_number": rep.mu0,
                   "replicas": replicas, "seed": seed}, out / "cauchy.json")
    svg.line_chart(rep.t_values, [rep.ks_distances], str(out / "cauchy_ks.svg"),
                   labels=["KS"])
    return ["cauchy.json", "cauchy_ks.svg"], EXIT_OK


def cmd_hitting(cfg, seed, out, workers, fmt, tol):
    if "density_coeffs" in cfg:
        c = np.asarray([complex(a, b) for a, b in cfg["density_coeffs"]])
        pair = harmonic.StationaryPair(harmonic.HarmonicFn(c),
                                       float(_cfg(cfg, "rotation_number", 0.0)))
    else:
        theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
        pair = harmonic.angle_to_pair(theta, tol)
    x = float(_cfg(cfg, "x_angle", 0.0))
    res = harmonic.hitting_test(pair, x, tol=tol)
    oio.dump_json({"verdict": res.verdict.value, "x_angle": x,
                   "estimate": res.estimate, "rate": res.rate,
                   "shells": res.shells.tolist(), "seed": seed},
                  out / "hitting.json")
    code = EXIT_INCONCLUSIVE if res.verdict is Verdict.INCONCLUSIVE else EXIT_OK
    return ["hitting.json"], code


def cmd_erbm(cfg, seed, out, workers, fmt, tol):
    nu_spec = _cfg(cfg, "nu", {"kind": "constant", "value": 1.0 / np.pi})
    if nu_spec["kind"] == "constant":
        nu = BoundaryField.constant(float(nu_spec["value"]), tol.n_grid,
                                    FieldKind.DENSITY)
    elif nu_spec["kind"] == "fourier":
        nu = BoundaryField.fourier(nu_spec.get("sin", ()), nu_spec.get("cos", ()),
                                   float(nu_spec.get("mean", 1.0 / np.pi)),
                                   tol.n_grid, FieldKind.DENSITY)
    else:
        raise ConfigError(f"unsupported nu kind {nu_spec['kind']!r}")
    eps = float(_cfg(cfg, "eps_dep", 0.25))
    T = float(_cfg(cfg, "horizon", 100.0))
    path = erbm.assemble_erbm(nu, eps, T, seed=seed)
    hist = path.occupation(int(_cfg(cfg, "nr", 8)), int(_cfg(cfg, "nt", 8)))
    l1 = hist.l1_error(erbm.kernel_mixture_density(nu), r_max=1.0 - eps)
    oio.dump_json({"n_excursions": len(path.excursions),
                   "total_time": path.total_time,
                   "excursion_time": path.excursion_time,
                   "core_l1_error": l1, "eps_dep": eps, "seed": seed},
                  out / "erbm.json")
    svg.polar_heatmap(hist.weights, str(out / "erbm_density.svg"))
    return ["erbm.json", "erbm_density.svg"], EXIT_OK


def cmd_transfer(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", required=True), tol.n_grid)
    m = conformal.map_from_dict(_cfg(cfg, "map", required=True))
    dt = float(_cfg(cfg, "dt", 1e-3))
    T = float(_cfg(cfg, "horizon", 10.0))
    path = disk.simulate(theta, 0.2, dt, T, seed)
    tr = conformal.transfer(path, m, float(_cfg(cfg, "target_dt", dt)))
    tp = disk.DiskPath(tr.target_dt, tr.positions,
                       np.zeros(len(tr.positions)), seed=seed, interpolated=True)
    outputs = []
    if fmt == "csv":
        oio.write_path_csv(tp, out / "transferred.csv")
        outputs.append("transferred.csv")
    else:
        oio.write_path_bin(tp, out / "transferred.bin")
        outputs.append("transferred.bin")
    svg.path_trace(tr.positions, str(out / "transferred.svg"))
    outputs.append("transferred.svg")
    oio.dump_json({"clock_end": float(tr.clock[-1]), "horizon": tr.horizon,
                   "map": m.to_dict(), "seed": seed}, out / "transfer.json")
    outputs.append("transfer.json")
    return outputs, EXIT_OK


def cmd_approx_domains(cfg, seed, out, workers, fmt, tol):
    theta = build_theta(_cfg(cfg, "theta", {"kind": "constant", "value": 0.2}), tol.n_grid)
    pair = harmonic.angle_to_pair(theta, tol)
    m = conformal.map_from_dict(_cfg(cfg, "map", required=True))
    r_list = _cfg(cfg, "r_list", [0.8, 0.9, 0.95, 0.99])
    rep = conformal.domain_approx_sequence(
        m, r_list, pair, n_pairs=int(_cfg(cfg, "paired_runs", 100)),
        dt=float(_cfg(cfg, "dt", 1e-3)), horizon=float(_cfg(cfg, "horizon", 2.0)),
        seed=seed, tol=tol)
    oio.dump_json({"r_list": rep.r_list, "m1_medians": rep.m1_medians,
                   "non_increasing": rep.non_increasing, "seed": seed},
                  out / "approx_domains.json")
    svg.line_chart(rep.r_list, [rep.m1_medians], str(out / "m1_medians.svg"),
                   labels=["median M1"])
    return (["approx_domains.json", "m1_medians.svg"],
            EXIT_OK if rep.non_increasing else EXIT_INTERNAL)


_COMMANDS = {
    "correspond": cmd_correspond,
    "simulate": cmd_simulate,
    "verify-stationary": cmd_verify_stationary,
    "rotation": cmd_rotation,
    "cauchy": cmd_cauchy,
    "hitting": cmd_hitting,
    "erbm": cmd_erbm,
    "transfer": cmd_transfer,
    "approx-domains": cmd_approx_domains,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="orbm",
        description="Reflected-Brownian-motion experiments in planar domains")
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--seed", type=int, default=None,
                    help="overrides the config seed")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--workers", type=int, default=None,
                    help="replica-level parallelism (default: hardware)")
    ap.add_argument("--format", choices=["csv", "json", "bin"], default="csv")
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config)
        tol = tolerances_from(cfg)
        seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
        workers = args.workers or cfg.get("workers") or os.cpu_count() or 1
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        outputs, code = _COMMANDS[args.command](cfg, seed, out, int(workers),
                                                args.format, tol)
        write_manifest(out, args.command, cfg, seed, outputs + ["manifest.json"])
        return code
    except ConfigError as e:
        print(json.dumps({"error": "config", "message": str(e)}), file=sys.stderr)
        return EXIT_CONFIG
    except InternalConsistencyFailure as e:
        print(json.dumps({"error": "internal_consistency", "message": str(e)}),
              file=sys.stderr)
        return EXIT_INTERNAL
    except OrbmError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e)}),
              file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
