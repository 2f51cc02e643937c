"""Command line interface: config parsing, subcommands, CSV output and run manifests.

    ponderoscatter potential-map --mu 0 --out run/
    ponderoscatter domain-map --planes -21,-16,-11,-6,-1,2 --out run/
    ponderoscatter scatter --seed 42 --workers 8 --out run/
    ponderoscatter trajectory --x0 1e-5 --y0 0 --z0 -6 --out run/
    ponderoscatter replay run/manifest.json --out rerun/

Exit status: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
import time
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    ConfigError,
    ParameterError,
    PhysicalConfig,
    StepError,
    derive_initial_state,
    derive_sim_params,
)
from .dynamics import DEFAULT_STEP, HISTORY_COLUMNS, integrate
from .experiment import (
    DEFAULT_PLANES,
    GridSpec,
    RadialScan,
    SamplingConfig,
    angular_histogram,
    default_workers,
    detected_alpha,
    domain_scan,
    potential_map,
    run_scatter,
    sampling_region,
    scan_planes,
)

log = logging.getLogger("ponderoscatter")

COMMANDS = ("potential-map", "domain-map", "scatter", "trajectory")
DOMAIN_PLANES = (-21, -16, -11, -6, -1, 2)
FMT = "%.17g"

# config key -> (PhysicalConfig field, parser)
CONFIG_KEYS = {
    "lambda_um": ("wavelength_um", float),
    "R_um": ("focal_radius_um", float),
    "omega_tau": ("omega_tau", float),
    "a": ("a", float),
    "eta0": ("eta0", float),
    "mu": ("mu", float),
    "electron_keV": ("electron_kev", float),
    "detector_z_cm": ("detector_z_cm", float),
    "detector_r1_cm": ("detector_r1_cm", float),
    "detector_r2_cm": ("detector_r2_cm", float),
    "envelope": ("envelope", str),
    "W_threshold_MeV": ("w_threshold_mev", float),
    "smoothing_deg": ("smoothing_deg", float),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in CONFIG_KEYS.items()}


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_config(text: str) -> PhysicalConfig:
    """Parse ``key = value`` lines (``#`` starts a comment) into a config.

    Missing keys keep their defaults; unknown or repeated keys are errors.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        name, conv = CONFIG_KEYS[key]
        if name in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        try:
            values[name] = conv(value)
        except ValueError:
            raise ParseError(f"bad value for {key}: {value!r}", lineno) from None
    cfg = PhysicalConfig(**values)
    cfg.validate()
    return cfg


def format_config(cfg: PhysicalConfig) -> str:
    """Inverse of :func:`parse_config`; floats are written with full precision."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        text = repr(float(value)) if isinstance(value, float) else str(value)
        lines.append(f"{_FIELD_TO_KEY[f.name]} = {text}")
    return "\n".join(lines) + "\n"


def parse_planes(text: str) -> tuple[int, ...]:
    """``N1..N2`` (inclusive) or a comma separated list."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad plane specification {text!r}") from None


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--mu", type=float)
    p.add_argument("--a", type=float, help="intensity as a (eta0 = a / sqrt 2)")
    p.add_argument("--eta0", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--samples-per-plane", type=int, default=30_000)
    p.add_argument("--planes", type=str, default=None)
    p.add_argument("--step", type=float, default=DEFAULT_STEP)
    p.add_argument("--naive-sampling", action="store_true")
    p.add_argument("--out", type=Path, default=Path("."))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="ponderoscatter", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pm = sub.add_parser("potential-map", parents=[common], help="U on a transverse grid")
    pm.add_argument("--extent", type=float, default=2.0, help="half width in units of R")
    pm.add_argument("--n", type=int, default=201, help="nodes per axis")
    pm.add_argument("--z", type=float, default=0.0, help="plane z in units of R")
    pm.add_argument("--phi", type=float, default=0.0)

    dm = sub.add_parser("domain-map", parents=[common], help="injection-domain cross sections")
    dm.add_argument("--extent", type=str, default="auto",
                    help="half width in units of R, or 'auto' from a radial scan")
    dm.add_argument("--n", type=int, default=101)

    sub.add_parser("scatter", parents=[common], help="Monte Carlo angular distribution")

    tr = sub.add_parser("trajectory", parents=[common], help="single trajectory dump")
    tr.add_argument("--x0", type=float, default=1e-5)
    tr.add_argument("--y0", type=float, default=0.0)
    tr.add_argument("--z0", type=float, default=-6.0)

    rp = sub.add_parser("replay", help="rerun a manifest and compare output hashes")
    rp.add_argument("manifest", type=Path)
    rp.add_argument("--out", type=Path, required=True)
    rp.add_argument("--workers", type=int, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> PhysicalConfig:
    """Defaults < config file < command line flags."""
    cfg = PhysicalConfig()
    if args.config is not None:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    updates = {}
    if args.mu is not None:
        updates["mu"] = args.mu
    if args.a is not None and args.eta0 is not None:
        raise ParameterError("give either --a or --eta0, not both")
    if args.a is not None:
        updates.update(a=args.a, eta0=None)
    if args.eta0 is not None:
        updates.update(eta0=args.eta0, a=None)
    cfg = PhysicalConfig(**{**asdict(cfg), **updates})
    cfg.validate()
    return cfg


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _savetxt(path: Path, columns: list, header: list, fmt) -> None:
    data = np.column_stack(columns) if columns and len(columns[0]) else np.empty((0, len(header)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        if data.size:
            np.savetxt(fh, data, fmt=fmt, delimiter=",")


def _options(args: argparse.Namespace) -> dict:
    skip = {"config", "out", "command", "workers", "manifest"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def dispatch(command: str, cfg: PhysicalConfig, opts: dict, out: Path, workers: int | None = None) -> dict:
    """Run one subcommand, write its CSV files and ``manifest.json`` into ``out``."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    params = derive_sim_params(cfg)
    workers = default_workers() if workers is None else int(workers)
    step = float(opts.get("step", DEFAULT_STEP))
    seed = int(opts.get("seed", 0))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files: list[Path] = []
    counts = {"total": 0, "detected": 0, "failed": 0}
    extra: dict = {}

    if command == "potential-map":
        grid = GridSpec.square(float(opts.get("extent", 2.0)), int(opts.get("n", 201)),
                               z=float(opts.get("z", 0.0)), phi=float(opts.get("phi", 0.0)))
        u = potential_map(grid, params)
        x, y = grid.mesh()
        path = out / "potential_map.csv"
        _savetxt(path, [x.ravel(), y.ravel(), u.ravel() * params.mc2_mev],
                 ["x_over_R", "y_over_R", "U_MeV"], FMT)
        files.append(path)

    elif command == "domain-map":
        planes = parse_planes(opts["planes"]) if opts.get("planes") else DOMAIN_PLANES
        extent = str(opts.get("extent", "auto"))
        n_nodes = int(opts.get("n", 101))
        if extent == "auto":
            maps = scan_planes(planes, params, RadialScan(), step, workers)
            extents = {}
            for n in planes:
                region = sampling_region(maps[n], dilation=1)
                extents[n] = region.r_hi if region is not None else 1e-4
        else:
            extents = {n: float(extent) for n in planes}
        extra["extents"] = {str(n): e for n, e in extents.items()}
        for n in planes:
            dm = domain_scan(n, GridSpec.square(extents[n], n_nodes), params, step, workers)
            path = out / f"domain_map_n{n}.csv"
            _savetxt(
                path,
                [np.full(dm.x.size, n), dm.x.ravel(), dm.y.ravel(), dm.detected.ravel(),
                 dm.W.ravel(), np.degrees(dm.alpha.ravel())],
                ["n", "x_over_R", "y_over_R", "detected", "W_MeV", "alpha_deg"],
                ["%d", FMT, FMT, "%d", FMT, FMT],
            )
            files.append(path)
            counts["total"] += int(dm.x.size)
            counts["detected"] += int(dm.detected.sum())

    elif command == "scatter":
        planes = parse_planes(opts["planes"]) if opts.get("planes") else DEFAULT_PLANES
        sampling = SamplingConfig(
            planes=planes,
            samples_per_plane=int(opts.get("samples_per_plane", 30_000)),
            naive=bool(opts.get("naive_sampling", False)),
        )
        run = run_scatter(params, sampling, seed=seed, workers=workers, step=step)
        rec = run.records
        path = out / "records.csv"
        _savetxt(
            path,
            [rec.plane, rec.x0, rec.y0, rec.W, np.degrees(rec.theta), np.degrees(rec.alpha),
             rec.X_cm, rec.Y_cm, rec.detected],
            ["plane_n", "x0_over_R", "y0_over_R", "W_MeV", "theta_deg", "alpha_deg",
             "X_cm", "Y_cm", "detected"],
            ["%d", FMT, FMT, FMT, FMT, FMT, FMT, FMT, "%d"],
        )
        files.append(path)
        counts = {"total": len(rec), "detected": rec.n_detected, "failed": rec.n_failed}
        extra["density_per_R2"] = run.density
        extra["regions"] = {str(n): (None if r is None else list(r)) for n, r in run.regions.items()}
        hist_path = out / "histogram.csv"
        if rec.n_detected:
            dist = angular_histogram(detected_alpha(rec), 1.0, params.smoothing_deg)
            _savetxt(hist_path, [dist.centers_deg, dist.counts, dist.smoothed],
                     ["alpha_deg", "count", "n_smoothed"], [FMT, "%d", FMT])
            extra["ratio_0_90"] = dist.ratio(0.0, 90.0)
        else:
            _savetxt(hist_path, [], ["alpha_deg", "count", "n_smoothed"], FMT)
            log.warning("no detected electrons; histogram left empty")
        files.append(hist_path)

    elif command == "trajectory":
        state0 = derive_initial_state(
            params, (opts.get("x0", 1e-5), opts.get("y0", 0.0), opts.get("z0", -6.0))
        )
        res = integrate(state0, params, step=step, record=True)
        path = out / "trajectory.csv"
        _savetxt(path, list(res.history.T), list(HISTORY_COLUMNS), FMT)
        files.append(path)
        counts["total"] = 1
        extra.update(W_MeV=res.kinetic_energy, theta_deg=float(np.degrees(res.polar_angle)),
                     closure_residual=res.closure_residual, lz_drift=res.lz_drift)

    elapsed = time.perf_counter() - start
    manifest = {
        "command": command,
        "options": opts,
        "config": asdict(cfg),
        "config_text": format_config(cfg),
        "derived": params.as_dict(),
        "seed": seed,
        "workers": workers,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "outputs": [
            {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size} for p in files
        ],
        "wall_seconds": elapsed,
        "trajectories": counts,
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
    return manifest


def replay(manifest_path: Path, out: Path, workers: int | None = None) -> tuple[dict, bool]:
    """Rerun a manifest; returns (new manifest, all output hashes equal)."""
    old = json.loads(Path(manifest_path).read_text())
    cfg = parse_config(old["config_text"])
    new = dispatch(old["command"], cfg, old["options"], Path(out), workers)
    same = [o["sha256"] for o in old["outputs"]] == [o["sha256"] for o in new["outputs"]]
    return new, same


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "replay":
            _, same = replay(args.manifest, args.out, args.workers)
            print("replay: outputs identical" if same else "replay: outputs differ")
            return 0 if same else 3
        cfg = resolve_config(args)
        manifest = dispatch(args.command, cfg, _options(args), args.out, args.workers)
    except (ConfigError, ParameterError, StepError) as exc:
        print(f"ponderoscatter: configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as runtime failure
        print(f"ponderoscatter: error: {exc}", file=sys.stderr)
        return 3
    t = manifest["trajectories"]
    log.info("%s: %d trajectories, %d detected, %d failed, %.1f s",
             args.command, t["total"], t["detected"], t["failed"], manifest["wall_seconds"])
    for o in manifest["outputs"]:
        log.info("wrote %s", args.out / o["path"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
