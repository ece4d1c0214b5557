"""Batch command-line front end.

One declarative JSON config describes the curvature field, the measure and
the quadrature; subcommands run the validation, metric evaluation, length
consistency check, geodesic tracing, measure-recovery roundtrip, hyperbolic
contrast case and the fibration export.  All numeric output is printed with
12 significant digits, every command echoes its fully resolved config as a
header comment, and grid work is split into fixed-size chunks so the output
bytes do not depend on the worker count.

Exit codes: 0 success, 1 inadmissible field or failed threshold, 2 parse or
numeric error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import circles as ci
from . import geodesics as ge
from . import horocycle as hc
from . import metric as mt
from . import pathgeometry as pg
from .sphere import normalize, sphere_grid

CHUNK = 2048  # fixed work-chunk size, independent of the worker count

DEFAULT_CONFIG = {
    "kappa": {"family": "zero", "coefficients": []},
    "measure": {"type": "constant", "value": 1.0},
    "quadrature": {
        "n_theta": 256,
        "fd_step": 1e-4,
        "sphere_grid_level": 6,
        "mc_samples": None,
        "seed": 0,
    },
    "seed": 0,
}


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _deep_update(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], val)
        else:
            out[key] = val
    return out


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        if "," in text:
            try:
                return [float(part) for part in text.split(",")]
            except ValueError:
                pass
        return text


def load_config(path: str | None, overrides: list[str]) -> dict:
    cfg = DEFAULT_CONFIG
    if path is not None:
        try:
            with open(path) as handle:
                user = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _deep_update(cfg, user)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        node: dict = {}
        leaf = node
        parts = key.split(".")
        for part in parts[:-1]:
            leaf[part] = {}
            leaf = leaf[part]
        leaf[parts[-1]] = _parse_set_value(value)
        cfg = _deep_update(cfg, node)
    _validate_config(cfg)
    return cfg


def _validate_config(cfg: dict) -> None:
    kappa = cfg.get("kappa", {})
    family = kappa.get("family")
    coeffs = kappa.get("coefficients", [])
    if family not in ("zero", "linear", "linear+cubic"):
        raise ConfigError(f"unknown kappa family {family!r}")
    if not all(np.isfinite(c) for c in coeffs):
        raise ConfigError("kappa coefficients must be finite")
    if family == "linear" and len(coeffs) != 3:
        raise ConfigError("linear kappa needs 3 coefficients")
    if family == "linear+cubic" and len(coeffs) != 13:
        raise ConfigError("linear+cubic kappa needs 3 + 10 coefficients")
    measure = cfg.get("measure", {})
    mtype = measure.get("type")
    if mtype == "constant":
        if not measure.get("value", 0) > 0:
            raise ConfigError("constant measure must be positive")
    elif mtype == "linear":
        if not abs(measure.get("amplitude", 1.0)) < 1.0:
            raise ConfigError("linear measure needs |amplitude| < 1")
    else:
        raise ConfigError(f"unknown measure type {mtype!r}")
    quad = cfg.get("quadrature", {})
    if quad.get("n_theta", 256) < 16:
        raise ConfigError("n_theta must be >= 16")


def build_field(cfg: dict) -> pg.KappaField:
    kappa = cfg["kappa"]
    family = kappa["family"]
    coeffs = [float(c) for c in kappa.get("coefficients", [])]
    if family == "zero":
        return pg.KappaField.zero()
    if family == "linear":
        return pg.KappaField.from_linear(coeffs)
    return pg.KappaField.from_linear_cubic(coeffs[:3], coeffs[3:])


def build_measure(cfg: dict) -> mt.MeasureDensity:
    measure = cfg["measure"]
    if measure["type"] == "constant":
        return mt.MeasureDensity.constant(float(measure["value"]))
    return mt.MeasureDensity.linear(
        float(measure["base"]),
        [float(c) for c in measure["direction"]],
        float(measure["amplitude"]),
    )


def build_spec(cfg: dict) -> mt.QuadratureSpec:
    quad = cfg["quadrature"]
    mc = quad.get("mc_samples")
    return mt.QuadratureSpec(
        n_theta=int(quad["n_theta"]),
        fd_step=float(quad["fd_step"]),
        sphere_grid_level=int(quad["sphere_grid_level"]),
        mc_samples=None if mc is None else int(mc),
        seed=int(quad.get("seed", cfg.get("seed", 0))),
    )


def echo_config(cfg: dict, out) -> None:
    print("# config: " + json.dumps(cfg, sort_keys=True), file=out)


def _parse_vec(text: str) -> np.ndarray:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}") from exc
    if len(parts) != 3:
        raise ConfigError(f"vector needs 3 components, got {text!r}")
    return np.array(parts)


def _chunked_map(fn, n_items: int, workers: int):
    """Apply fn to fixed-size index chunks, keeping the output order."""
    ranges = [(lo, min(lo + CHUNK, n_items)) for lo in range(0, n_items, CHUNK)]
    if workers <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: fn(*r), ranges))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = build_field(cfg)
    report = pg.admissibility(field, args.grid_level)
    print("property,value", file=out)
    print(f"ok,{str(report.ok).lower()}", file=out)
    print(f"margin,{fmt(report.margin)}", file=out)
    print(
        "worst_point," + ",".join(fmt(c) for c in report.worst_point),
        file=out,
    )
    return 0 if report.ok else 1


def _require_admissible(cfg: dict, out) -> pg.KappaField:
    field = build_field(cfg)
    report = pg.admissibility(field, 4)
    if not report.ok:
        print(f"# inadmissible field: margin {fmt(report.margin)}", file=out)
        raise _Inadmissible()
    return field


class _Inadmissible(Exception):
    pass


def cmd_metric(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = _require_admissible(cfg, out)
    density = build_measure(cfg)
    spec = build_spec(cfg)
    p = normalize(_parse_vec(args.p))
    if args.indicatrix:
        rows = mt.indicatrix_sample(field, density, p, args.n, spec)
        print("theta,radius", file=out)
        for theta, radius in rows:
            print(f"{fmt(theta)},{fmt(radius)}", file=out)
        return 0
    if args.v is None:
        raise ConfigError("metric needs --v or --indicatrix")
    v = _parse_vec(args.v)
    v = v - p * (v @ p)
    f_val = mt.finsler_F(field, density, p, v, spec)
    print("F", file=out)
    print(fmt(f_val), file=out)
    return 0


def _curve_polylines(kind: str, field, seed: int) -> list[np.ndarray]:
    if kind == "equator":
        return [ci.polyline_from_circle(ci.SphereCircle(np.array([0.0, 0.0, 1.0]), np.pi / 2), 128)]
    if kind.startswith("random:"):
        count = int(kind.split(":", 1)[1])
        rng = np.random.default_rng(seed)
        polys = []
        for _ in range(count):
            p = normalize(rng.standard_normal(3))
            t = normalize(np.cross(rng.standard_normal(3), p))
            curvature = rng.uniform(-1.0, 1.0)
            circle = ci.circle_from_contact(ci.ContactElement(p, t), curvature)
            length = rng.uniform(0.3, 0.9)
            start = rng.uniform(0.0, circle.circumference())
            polys.append(ci.circle_arc(circle, start, start + length, 33))
        return polys
    raise ConfigError(f"unknown curve spec {kind!r} (use equator or random:N)")


def _crofton_parallel(field, density, poly, spec, workers: int) -> float:
    if spec.mc_samples:
        grid_x = normalize(
            np.random.Generator(np.random.Philox(key=spec.seed)).standard_normal((spec.mc_samples, 3))
        )
        weights = np.full(spec.mc_samples, 4.0 * np.pi / spec.mc_samples)
    else:
        grid = sphere_grid(spec.sphere_grid_level)
        grid_x = grid.centroids
        weights = grid.areas

    def work(lo, hi):
        counts = mt.crofton_counts(field, grid_x[lo:hi], poly, spec.seed, indices=np.arange(lo, hi))
        return float(np.sum(weights[lo:hi] * density.value(grid_x[lo:hi]) * counts))

    return float(sum(_chunked_map(work, grid_x.shape[0], workers)))


def cmd_crofton_check(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = _require_admissible(cfg, out)
    density = build_measure(cfg)
    spec = build_spec(cfg)
    polys = _curve_polylines(args.curve, field, cfg["seed"])
    print("curve,finsler_length,crofton_length,relative_gap", file=out)
    worst = 0.0
    for i, poly in enumerate(polys):
        lf = mt.finsler_length(field, density, poly, spec)
        lc = _crofton_parallel(field, density, poly, spec, args.workers)
        gap = abs(lf - lc) / lc if lc != 0 else 0.0
        worst = max(worst, gap)
        print(f"{i},{fmt(lf)},{fmt(lc)},{fmt(gap)}", file=out)
    print(f"# max_gap {fmt(worst)} threshold {fmt(args.threshold)}", file=out)
    return 0 if worst < args.threshold else 1


def cmd_geodesic(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = _require_admissible(cfg, out)
    density = build_measure(cfg)
    spec = build_spec(cfg)
    p = normalize(_parse_vec(args.p))
    t = _parse_vec(args.t)
    t = normalize(t - p * (t @ p))
    element = ci.ContactElement(p, t)
    trace = ge.geodesic_trace(field, density, element, args.T, spec, step=args.step)
    _, target = pg.tangent_circle(field, element)
    deviation = ge.circle_deviation(trace, target)
    drift = float(np.max(np.abs(trace.f_values - 1.0)))
    print("time,x1,x2,x3,v1,v2,v3,F", file=out)
    for i in range(trace.times.size):
        row = [trace.times[i], *trace.points[i], *trace.velocities[i], trace.f_values[i]]
        print(",".join(fmt(val) for val in row), file=out)
    print(f"# circle_deviation {fmt(deviation)}", file=out)
    print(f"# energy_drift {fmt(drift)}", file=out)
    return 0


def cmd_roundtrip(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = _require_admissible(cfg, out)
    density = build_measure(cfg)
    spec = build_spec(cfg)
    pts = sphere_grid(args.grid_level).vertices
    even = density.even_part()

    def work(lo, hi):
        return ge.recover_measure(field, density, spec=spec, points=pts[lo:hi]).m_hat

    m_hat = np.concatenate(_chunked_map(work, pts.shape[0], args.workers))
    m_true = even.value(pts)
    rel = np.abs(m_hat - m_true) / m_true
    print("x1,x2,x3,m_even,m_hat,rel_err", file=out)
    for i in range(pts.shape[0]):
        row = [*pts[i], m_true[i], m_hat[i], rel[i]]
        print(",".join(fmt(val) for val in row), file=out)
    print(f"# max_rel_err {fmt(float(rel.max()))}", file=out)
    return 0


def cmd_hyperbolic(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    apex = np.array([0.0, 0.0, 1.0])
    e1 = np.array([1.0, 0.0, 0.0])
    n_theta = int(cfg["quadrature"]["n_theta"])
    c0 = hc.finsler_F_h(args.weight, apex, e1, n_theta)
    print(f"c0,{fmt(c0)}", file=out)
    print("sample,x1,x2,x3,F_unit,F_xi3,ratio", file=out)
    rng = np.random.default_rng(cfg["seed"])
    for i in range(args.samples):
        iso = hc.random_isometry(rng)
        x = iso @ apex
        v = iso @ e1
        f1 = hc.finsler_F_h("unit", x, v, n_theta)
        f2 = hc.finsler_F_h("xi3", x, v, n_theta)
        row = [i, *x, f1, f2, f2 / f1]
        print(",".join(fmt(val) if j else str(int(val)) for j, val in enumerate(row)), file=out)
    x0 = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
    v0 = np.array([0.0, 1.0, 0.0])
    div = hc.conformal_divergence(x0, v0, 1.0)
    ctrl = hc.conformal_divergence(x0, v0, 1.0, exponent=0.0)
    print(f"# conformal_divergence {fmt(div)}", file=out)
    print(f"# constant_weight_control {fmt(ctrl)}", file=out)
    return 0


def cmd_fibration_export(cfg: dict, args, out) -> int:
    echo_config(cfg, out)
    field = _require_admissible(cfg, out)
    pts = sphere_grid(args.grid_level).vertices

    def work(lo, hi):
        x = pts[lo:hi]
        kappa = field.value(x)
        f_val = pg.f_kappa(field, x)
        axes, radii = pg.realize_circles_batch(field, x)
        lines = []
        for i in range(x.shape[0]):
            record = {
                "x": [float(fmt(c)) for c in x[i]],
                "kappa": float(fmt(kappa[i])),
                "f": [float(fmt(c)) for c in f_val[i]],
                "axis": [float(fmt(c)) for c in axes[i]],
                "radius": float(fmt(radii[i])),
            }
            lines.append(json.dumps(record, sort_keys=True))
        return lines

    for chunk in _chunked_map(work, pts.shape[0], args.workers):
        for line in chunk:
            print(line, file=out)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circlefinsler",
        description="Metrics on the two-sphere whose geodesics are circles",
    )

    def common(target, suppress):
        default = argparse.SUPPRESS if suppress else None
        target.add_argument("--config", help="path to a JSON config file",
                            **({"default": default} if suppress else {}))
        target.add_argument("--set", action="append", metavar="KEY=VALUE",
                            help="override a config entry (dotted keys)",
                            **({"default": default} if suppress else {"default": []}))
        target.add_argument("--workers", type=int, help="worker threads for grid work",
                            **({"default": default} if suppress else {"default": 1}))

    common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        common(p, suppress=True)
        return p

    p = add_cmd("validate", "admissibility report for the kappa field")
    p.add_argument("--grid-level", type=int, default=5)

    p = add_cmd("metric", "evaluate F or sample the indicatrix")
    p.add_argument("--p", required=True, help="base point x,y,z")
    p.add_argument("--v", help="tangent vector x,y,z")
    p.add_argument("--indicatrix", action="store_true")
    p.add_argument("-N", "--n", type=int, default=64, help="indicatrix samples")

    p = add_cmd("crofton-check", "compare metric length with the intersection oracle")
    p.add_argument("--curve", default="equator", help="equator or random:N")
    p.add_argument("--threshold", type=float, default=0.01)

    p = add_cmd("geodesic", "trace a geodesic from a contact element")
    p.add_argument("--p", required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--step", type=float, default=1e-2)

    p = add_cmd("roundtrip", "measure recovery roundtrip on a grid")
    p.add_argument("--grid-level", type=int, default=3)

    p = add_cmd("hyperbolic", "horocycle metrics, conformal factor, divergence")
    p.add_argument("--weight", choices=["unit", "xi3"], default="unit")
    p.add_argument("--samples", type=int, default=10)

    p = add_cmd("fibration-export", "per-label circle data as JSON lines")
    p.add_argument("--grid-level", type=int, default=2)

    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "metric": cmd_metric,
    "crofton-check": cmd_crofton_check,
    "geodesic": cmd_geodesic,
    "roundtrip": cmd_roundtrip,
    "hyperbolic": cmd_hyperbolic,
    "fibration-export": cmd_fibration_export,
}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config, args.set)
        return _COMMANDS[args.command](cfg, args, out)
    except _Inadmissible:
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, pg.FibrationSolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
