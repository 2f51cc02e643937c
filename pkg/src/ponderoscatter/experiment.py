"""Numerical experiments: potential maps, injection domains, angular distributions.

Electrons that reach the detector above threshold start extremely close to the
beam axis (radii of order 1e-9 to 1e-2 R, depending on plane and azimuth),
because the on-axis ponderomotive hill is unstable and the energy gain is set
by how long an electron balances on it.  Domain scans therefore run on a
log-radial grid; Cartesian grids are used for pictures of a single plane.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .core import ConfigError, EmptyError, SimParams, r_to_cm
from .dynamics import DEFAULT_STEP, EXIT_COLUMNS, integrate_batch
from .field import potential

DEFAULT_PLANES = tuple(range(-27, 6))
CHUNK = 2048  # positions per task; even, and independent of the worker count
_COL = {name: i for i, name in enumerate(EXIT_COLUMNS)}


@dataclass(frozen=True)
class GridSpec:
    """Cartesian raster in units of R at fixed z (units of R) and phase phi."""

    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int
    z: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must satisfy max > min")

    @classmethod
    def square(cls, half_width: float, n: int, z: float = 0.0, phi: float = 0.0) -> "GridSpec":
        return cls(-half_width, half_width, n, -half_width, half_width, n, z, phi)

    @staticmethod
    def _axis(lo: float, hi: float, n: int) -> np.ndarray:
        # mirror-exact about the centre: node i and node n-1-i are exact negatives
        centre = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        k = 2.0 * np.arange(n) - (n - 1)
        return centre + half * (k / (n - 1))

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return self._axis(self.x_min, self.x_max, self.nx), self._axis(self.y_min, self.y_max, self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates with shape (ny, nx)."""
        xs, ys = self.axes()
        return np.meshgrid(xs, ys)


@dataclass(frozen=True)
class RadialScan:
    """Log-spaced radii times azimuths in the first quadrant.

    One quadrant suffices: the potential, and hence every trajectory, is
    mapped exactly onto itself by x -> -x and by y -> -y.  Azimuths sit at
    bin midpoints so no node lies on the x or y axis; injections exactly on an
    axis form a set of zero area but behave differently (they cannot leave
    the symmetry line).
    """

    r_min: float = 1e-9
    r_max: float = 1.0
    per_decade: int = 10
    n_azimuth: int = 6

    def radii(self) -> np.ndarray:
        n = int(round(math.log10(self.r_max / self.r_min) * self.per_decade)) + 1
        return self.r_min * 10.0 ** (np.arange(n) / self.per_decade)

    def azimuths(self) -> np.ndarray:
        return (np.arange(self.n_azimuth) + 0.5) * (0.5 * np.pi / self.n_azimuth)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates with shape (n_radii, n_azimuth)."""
        r, a = np.meshgrid(self.radii(), self.azimuths(), indexing="ij")
        return r * np.cos(a), r * np.sin(a)


@dataclass
class DomainMap:
    n: int
    grid: GridSpec | RadialScan
    x: np.ndarray
    y: np.ndarray
    detected: np.ndarray
    W: np.ndarray
    alpha: np.ndarray

    @property
    def empty(self) -> bool:
        return not bool(self.detected.any())

    def detected_radii(self) -> np.ndarray:
        return np.hypot(self.x, self.y)[self.detected]


class Annulus(NamedTuple):
    r_lo: float
    r_hi: float

    @property
    def area(self) -> float:
        return math.pi * (self.r_hi * self.r_hi - self.r_lo * self.r_lo)


class ScatterRecord(NamedTuple):
    plane: int
    index: int
    x0: float
    y0: float
    W: float
    theta: float
    alpha: float
    X_cm: float
    Y_cm: float
    detected: bool


@dataclass
class ScatterRecords:
    """Column store of scatter records in canonical (plane, index) order."""

    plane: np.ndarray
    index: np.ndarray
    x0: np.ndarray
    y0: np.ndarray
    W: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    X_cm: np.ndarray
    Y_cm: np.ndarray
    detected: np.ndarray
    failed: np.ndarray

    def __len__(self) -> int:
        return self.plane.size

    def __getitem__(self, i: int) -> ScatterRecord:
        return ScatterRecord(
            int(self.plane[i]), int(self.index[i]), float(self.x0[i]), float(self.y0[i]),
            float(self.W[i]), float(self.theta[i]), float(self.alpha[i]),
            float(self.X_cm[i]), float(self.Y_cm[i]), bool(self.detected[i]),
        )

    @property
    def n_detected(self) -> int:
        return int(self.detected.sum())

    @property
    def n_failed(self) -> int:
        return int(self.failed.sum())


@dataclass
class AngularDistribution:
    centers_deg: np.ndarray
    counts: np.ndarray
    smoothed: np.ndarray
    bin_deg: float
    window_deg: float

    def value_at(self, alpha_deg: float) -> float:
        j = int(np.argmin(np.abs(_wrap_deg(self.centers_deg - alpha_deg))))
        return float(self.smoothed[j])

    def ratio(self, a_deg: float = 0.0, b_deg: float = 90.0) -> float:
        """<n>(a) / <n>(b); inf when the denominator bin is empty."""
        num, den = self.value_at(a_deg), self.value_at(b_deg)
        if den == 0.0:
            return math.inf if num > 0 else math.nan
        return num / den


@dataclass
class SamplingConfig:
    """How injections are drawn.

    ``samples_per_plane`` is a mean: the total budget ``samples_per_plane *
    len(planes)`` is spread at one uniform areal density over all sampling
    regions, so every plane sees the same electron density.  ``density``
    (per R^2) overrides the budget.
    """

    planes: tuple[int, ...] = DEFAULT_PLANES
    samples_per_plane: int = 30_000
    density: float | None = None
    naive: bool = False
    disc_radius: float = 2.0
    scan: RadialScan = field(default_factory=RadialScan)
    dilation: int = 2
    cap: float = 1e8


@dataclass
class ScatterRun:
    records: ScatterRecords
    regions: dict
    counts: dict
    density: float

    @property
    def n_total(self) -> int:
        return len(self.records)


def _wrap_deg(a):
    return (np.asarray(a) + 180.0) % 360.0 - 180.0


def potential_map(grid: GridSpec, params: SimParams) -> np.ndarray:
    """U (units of m) on the grid nodes, shape (ny, nx)."""
    x, y = grid.mesh()
    return potential(x, y, params.delta * grid.z, grid.phi, params)


# --- parallel plumbing -------------------------------------------------------

def _batch_task(args):
    x, y, z, params, step = args
    return integrate_batch(x, y, z, params, step)


def _scatter_task(args):
    n, k0, k1, region, seed, params, step = args
    x, y = injection_positions(seed, n, region, k0, k1)
    return integrate_batch(x, y, float(n), params, step)


def _warm_up(params: SimParams, step: float) -> None:
    integrate_batch(np.zeros(1), np.zeros(1), 0.0, params, step)


def _run_tasks(fn, tasks: list, workers: int | None) -> list:
    """Run tasks in order; the result list is independent of ``workers``."""
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def default_workers() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _batched_integrate(x, y, z, params, step, workers):
    x = np.ascontiguousarray(x, float).ravel()
    y = np.ascontiguousarray(y, float).ravel()
    _warm_up(params, step)
    tasks = [
        (x[i:i + CHUNK], y[i:i + CHUNK], float(z), params, step)
        for i in range(0, x.size, CHUNK)
    ]
    parts = _run_tasks(_batch_task, tasks, workers)
    return np.concatenate(parts) if parts else np.empty((0, len(EXIT_COLUMNS)))


# --- domain of injection positions -------------------------------------------

def domain_scan(
    n: int,
    grid: GridSpec | RadialScan,
    params: SimParams,
    step: float = DEFAULT_STEP,
    workers: int | None = 1,
) -> DomainMap:
    """Integrate one trajectory per grid node injected in the plane z = n R.

    A node is detected when the electron ends above the energy threshold and
    its straight-line flight crosses the detector plane inside the ring.
    """
    x, y = grid.mesh()
    out = _batched_integrate(x, y, float(n), params, step, workers).reshape(x.shape + (-1,))
    return DomainMap(
        n=int(n),
        grid=grid,
        x=x,
        y=y,
        detected=out[..., _COL["detected"]] > 0,
        W=out[..., _COL["W_MeV"]],
        alpha=out[..., _COL["alpha"]],
    )


def sampling_region(domain: DomainMap, dilation: int = 2) -> Annulus | None:
    """Annulus enclosing the detected nodes, widened by ``dilation`` grid cells.

    Radial scans dilate in log-radius; Cartesian grids by ``dilation`` cell
    widths.  Returns None for an empty domain.
    """
    if domain.empty:
        return None
    grid = domain.grid
    if isinstance(grid, RadialScan):
        radii = grid.radii()
        hit = np.nonzero(domain.detected.any(axis=1))[0]
        lo, hi = hit[0] - dilation, hit[-1] + dilation
        r_lo = float(radii[lo]) if lo >= 0 else 0.0
        step = 10.0 ** (1.0 / grid.per_decade)
        r_hi = float(radii[min(hi, radii.size - 1)] * step ** max(0, hi - radii.size + 1))
        return Annulus(r_lo, r_hi)
    cell = max((grid.x_max - grid.x_min) / (grid.nx - 1), (grid.y_max - grid.y_min) / (grid.ny - 1))
    r = domain.detected_radii()
    return Annulus(max(0.0, float(r.min()) - dilation * cell), float(r.max()) + dilation * cell)


def scan_planes(
    planes: Sequence[int],
    params: SimParams,
    scan: RadialScan | None = None,
    step: float = DEFAULT_STEP,
    workers: int | None = 1,
) -> dict[int, DomainMap]:
    """Radial domain scans for several planes, run as one batch."""
    scan = scan or RadialScan()
    x, y = scan.mesh()
    planes = [int(n) for n in planes]
    _warm_up(params, step)
    xf, yf = x.ravel(), y.ravel()
    tasks = []
    for n in planes:
        tasks += [(xf[i:i + CHUNK], yf[i:i + CHUNK], float(n), params, step)
                  for i in range(0, xf.size, CHUNK)]
    parts = _run_tasks(_batch_task, tasks, workers)
    per_plane = len(parts) // max(len(planes), 1)
    maps = {}
    for j, n in enumerate(planes):
        out = np.concatenate(parts[j * per_plane:(j + 1) * per_plane]).reshape(x.shape + (-1,))
        maps[n] = DomainMap(
            n=n, grid=scan, x=x, y=y,
            detected=out[..., _COL["detected"]] > 0,
            W=out[..., _COL["W_MeV"]],
            alpha=out[..., _COL["alpha"]],
        )
    return maps


# --- sampling ----------------------------------------------------------------

def _plane_key(seed: int, n: int) -> np.ndarray:
    return np.random.SeedSequence([int(seed), 0x5CA7, int(n) + 1_000_000]).generate_state(2, np.uint64)


def injection_positions(seed: int, n: int, region: Annulus, k0: int, k1: int):
    """Positions k0 <= k < k1 of plane n, uniform in area over ``region``.

    Philox is counter based: each counter block yields four 64-bit words, i.e.
    two positions, so position k depends only on (seed, n, k).  ``k0`` must be
    even.
    """
    if k0 % 2:
        raise ValueError("k0 must be even")
    m = k1 - k0
    bitgen = np.random.Philox(key=_plane_key(seed, n), counter=[k0 // 2, 0, 0, 0])
    u = np.random.Generator(bitgen).random(2 * m).reshape(m, 2)
    lo2 = region.r_lo * region.r_lo
    r = np.sqrt(lo2 + u[:, 0] * (region.r_hi * region.r_hi - lo2))
    a = 2.0 * np.pi * u[:, 1]
    return r * np.cos(a), r * np.sin(a)


def plane_counts(regions: dict, density: float) -> dict[int, int]:
    return {n: (0 if reg is None else int(round(density * reg.area))) for n, reg in regions.items()}


def resolve_density(cfg: SamplingConfig, regions: dict) -> float:
    area = sum(reg.area for reg in regions.values() if reg is not None)
    if cfg.density is not None:
        density = float(cfg.density)
    elif area > 0:
        density = cfg.samples_per_plane * len(cfg.planes) / area
    else:
        density = 0.0
    total = density * area
    if total > cfg.cap:
        raise ConfigError(
            f"requested {total:.3g} trajectories exceeds the cap {cfg.cap:.3g}"
        )
    return density


def sampling_regions(
    cfg: SamplingConfig, params: SimParams, step: float = DEFAULT_STEP, workers: int | None = 1
) -> dict[int, Annulus | None]:
    if cfg.naive:
        return {int(n): Annulus(0.0, float(cfg.disc_radius)) for n in cfg.planes}
    maps = scan_planes(cfg.planes, params, cfg.scan, step, workers)
    return {n: sampling_region(m, cfg.dilation) for n, m in maps.items()}


def sample_injections(
    regions: dict, density: float, seed: int, chunk: int = CHUNK
) -> Iterator[tuple[int, int, np.ndarray, np.ndarray]]:
    """Yield (plane, first index, x, y) chunks in canonical order."""
    for n, count in plane_counts(regions, density).items():
        for k0 in range(0, count, chunk):
            k1 = min(k0 + chunk, count)
            x, y = injection_positions(seed, n, regions[n], k0, k1)
            yield n, k0, x, y


def run_scatter(
    params: SimParams,
    sampling: SamplingConfig | None = None,
    seed: int = 0,
    workers: int | None = None,
    step: float = DEFAULT_STEP,
) -> ScatterRun:
    """Sample injections, integrate them, and test each against the detector.

    Chunks of ``CHUNK`` positions are the unit of work; results are reassembled
    in (plane, index) order, so the output is bitwise identical for any worker
    count.  Trajectories that produce non-finite states are kept and flagged
    ``failed``.
    """
    cfg = sampling or SamplingConfig()
    regions = sampling_regions(cfg, params, step, workers)
    density = resolve_density(cfg, regions)
    counts = plane_counts(regions, density)
    tasks = [
        (n, k0, min(k0 + CHUNK, count), regions[n], int(seed), params, step)
        for n, count in counts.items()
        for k0 in range(0, count, CHUNK)
    ]
    _warm_up(params, step)
    parts = _run_tasks(_scatter_task, tasks, workers)
    planes, index, x0, y0 = [], [], [], []
    for (n, k0, k1, region, *_), part in zip(tasks, parts):
        x, y = injection_positions(seed, n, region, k0, k1)
        planes.append(np.full(k1 - k0, n, dtype=np.int64))
        index.append(np.arange(k0, k1, dtype=np.int64))
        x0.append(x)
        y0.append(y)
    out = np.concatenate(parts) if parts else np.empty((0, len(EXIT_COLUMNS)))

    def cat(chunks, dtype=float):
        return np.concatenate(chunks) if chunks else np.empty(0, dtype)

    f = params.focal_radius_um
    records = ScatterRecords(
        plane=cat(planes, np.int64),
        index=cat(index, np.int64),
        x0=cat(x0),
        y0=cat(y0),
        W=out[:, _COL["W_MeV"]],
        theta=out[:, _COL["theta"]],
        alpha=out[:, _COL["alpha"]],
        X_cm=r_to_cm(out[:, _COL["X"]], f),
        Y_cm=r_to_cm(out[:, _COL["Y"]], f),
        detected=out[:, _COL["detected"]] > 0,
        failed=out[:, _COL["failed"]] > 0,
    )
    return ScatterRun(records=records, regions=regions, counts=counts, density=density)


# --- angular distribution ----------------------------------------------------

def _box_weights(bin_deg: float, window_deg: float) -> np.ndarray:
    """Overlap of each bin with a centred window, weights[k] for offset k >= 0."""
    half = 0.5 * window_deg
    kmax = int(math.ceil(half / bin_deg + 0.5))
    w = []
    for k in range(kmax + 1):
        lo, hi = k * bin_deg - 0.5 * bin_deg, k * bin_deg + 0.5 * bin_deg
        w.append(max(0.0, min(hi, half) - max(lo, -half)) / bin_deg)
    return np.array(w)


def angular_histogram(
    alpha, bin_deg: float = 1.0, window_deg: float = 5.5
) -> AngularDistribution:
    """Histogram of detected azimuths [rad], wrap-around boxcar smoothing, max-normalized.

    Bins are centred on multiples of ``bin_deg`` so 0 and 90 degrees are bin
    centres.  The window average uses fractional weights at its edges.
    """
    nbins = 360.0 / bin_deg
    if abs(nbins - round(nbins)) > 1e-9:
        raise ValueError("bin width must divide 360 degrees")
    if window_deg < bin_deg:
        raise ValueError("smoothing window must be at least one bin wide")
    nbins = int(round(nbins))
    alpha = np.asarray(alpha, float)
    alpha = alpha[np.isfinite(alpha)]
    if alpha.size == 0:
        raise EmptyError("no detected records")
    half = nbins // 2
    j = np.floor(np.degrees(alpha) / bin_deg + 0.5).astype(np.int64)
    j = (j + half) % nbins
    counts = np.bincount(j, minlength=nbins).astype(float)
    weights = _box_weights(bin_deg, window_deg)
    smoothed = weights[0] * counts
    for k in range(1, weights.size):
        smoothed = smoothed + weights[k] * (np.roll(counts, k) + np.roll(counts, -k))
    smoothed = smoothed / smoothed.max()
    centers = (np.arange(nbins) - half) * bin_deg
    return AngularDistribution(centers, counts, smoothed, bin_deg, window_deg)


def detected_alpha(records: ScatterRecords) -> np.ndarray:
    return records.alpha[records.detected]
