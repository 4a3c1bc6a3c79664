"""Distribution comparison machinery.

Characteristic functions on grids (empirical averages of unit exponentials
on one side, the local-factor product

    M_p(u,v) = 1/(p+1) + p/(2(p+1)) e^{i Re(conj(z) A+_p)}
                       + p/(2(p+1)) e^{i Re(conj(z) A-_p)},
    A+_p =  (log p) sum_j alpha_j / (p^{1+it} - alpha_j),
    A-_p = -(log p) sum_j alpha_j / (p^{1+it} + alpha_j),

with z = u + iv on the other), Fourier inversion to densities, rectangle
discrepancy between sample sets, a two-dimensional Berry-Esseen evaluator,
and small-value statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import SatakeProvider
from .errors import (
    DimensionMismatchError,
    EmptySampleError,
    GridCoverageError,
    InsufficientDecayError,
    SingularFactorError,
)
from .ntcore import sieve_primes
from .samplesets import ComplexSampleSet

# constant of the two-dimensional smoothing inequality
SADIKOVA_CONSTANT = 3.0 * math.sqrt(2.0) + 4.0 * math.sqrt(3.0) + 24.0 / math.pi

DEFAULT_MODEL_PRIME_CUTOFF = 100_000
_GRID_CHUNK = 512
_SAMPLE_CHUNK = 100_000


# ---------------------------------------------------------------------------
# characteristic-function grids


@dataclass(frozen=True)
class CharFnGrid:
    """Sampled characteristic function.

    1D grids have ``vgrid`` None and a vector of values over ``ugrid``;
    2D grids carry a (len(ugrid), len(vgrid)) matrix.  ``source`` is
    "empirical" or "model"; ``meta`` records the truncation (prime cutoff or
    sample count).
    """

    ugrid: np.ndarray
    vgrid: np.ndarray | None
    values: np.ndarray
    source: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        u = np.asarray(self.ugrid, dtype=np.float64)
        object.__setattr__(self, "ugrid", u)
        if np.any(np.diff(u) <= 0):
            raise ValueError("ugrid must be strictly ascending")
        vals = np.asarray(self.values, dtype=np.complex128)
        object.__setattr__(self, "values", vals)
        if self.vgrid is None:
            if vals.shape != u.shape:
                raise ValueError("1D grid values must parallel ugrid")
        else:
            v = np.asarray(self.vgrid, dtype=np.float64)
            object.__setattr__(self, "vgrid", v)
            if np.any(np.diff(v) <= 0):
                raise ValueError("vgrid must be strictly ascending")
            if vals.shape != (len(u), len(v)):
                raise ValueError("2D grid values must be (len(u), len(v))")

    @property
    def is_1d(self) -> bool:
        return self.vgrid is None

    def _index(self, grid, x) -> int:
        i = int(np.argmin(np.abs(grid - x)))
        if abs(grid[i] - x) > 1e-9:
            raise GridCoverageError(f"{x} is not a grid point")
        return i

    def value_at(self, u: float, v: float = 0.0) -> complex:
        iu = self._index(self.ugrid, u)
        if self.is_1d:
            if v != 0.0:
                raise GridCoverageError("1D grid has no v axis")
            return complex(self.values[iu])
        return complex(self.values[iu, self._index(self.vgrid, v)])

    def validate(self) -> None:
        """Check the grid invariants; raises ValueError on violation."""
        mags = np.abs(self.values)
        if mags.max() > 1.0 + 1e-9:
            raise ValueError(f"|phi| exceeds 1 ({mags.max():.12g})")
        try:
            if self.value_at(0.0, 0.0) != 1.0 + 0.0j:
                raise ValueError("phi(0,0) != 1")
        except GridCoverageError:
            pass
        # conjugate symmetry wherever the mirrored point is on the grid
        u, v = self.ugrid, self.vgrid
        if np.allclose(u, -u[::-1]):
            if self.is_1d:
                err = np.abs(self.values - np.conj(self.values[::-1])).max()
            elif np.allclose(v, -v[::-1]):
                err = np.abs(self.values - np.conj(self.values[::-1, ::-1])).max()
            else:
                return
            if err > 1e-9:
                raise ValueError(f"conjugate symmetry violated ({err:.3g})")


def _pin_unit(vals: np.ndarray, u: np.ndarray, v: np.ndarray | None = None) -> None:
    """Set phi to exactly 1 at the origin grid point (its true value)."""
    iu = np.flatnonzero(u == 0.0)
    if len(iu) == 0:
        return
    if v is None:
        vals[iu[0]] = 1.0 + 0.0j
        return
    iv = np.flatnonzero(v == 0.0)
    if len(iv):
        vals[iu[0], iv[0]] = 1.0 + 0.0j


def phi_empirical(samples: ComplexSampleSet, u: float, v: float = 0.0) -> complex:
    """(1/n) sum exp(i (u Re w + v Im w)) over the sample set."""
    if len(samples) == 0:
        raise EmptySampleError("empty sample set")
    w = samples.values
    return complex(np.mean(np.exp(1j * (u * w.real + v * w.imag))))


def empirical_char_grid(
    samples: ComplexSampleSet,
    ugrid: np.ndarray,
    vgrid: np.ndarray | None = None,
) -> CharFnGrid:
    """Empirical characteristic function evaluated on a grid."""
    if len(samples) == 0:
        raise EmptySampleError("empty sample set")
    u = np.asarray(ugrid, dtype=np.float64)
    re = samples.values.real
    im = samples.values.imag
    n = len(samples)
    meta = {"samples": n, **samples.meta}
    if vgrid is None:
        acc = np.zeros(len(u), dtype=np.complex128)
        for lo in range(0, n, _SAMPLE_CHUNK):
            acc += np.exp(1j * np.outer(u, re[lo : lo + _SAMPLE_CHUNK])).sum(axis=1)
        vals = acc / n
        _pin_unit(vals, u)
        return CharFnGrid(u, None, vals, "empirical", meta)
    v = np.asarray(vgrid, dtype=np.float64)
    acc = np.zeros((len(u), len(v)), dtype=np.complex128)
    for lo in range(0, n, _SAMPLE_CHUNK):
        eu = np.exp(1j * np.outer(u, re[lo : lo + _SAMPLE_CHUNK]))
        ev = np.exp(1j * np.outer(v, im[lo : lo + _SAMPLE_CHUNK]))
        acc += eu @ ev.T
    vals = acc / n
    _pin_unit(vals, u, v)
    return CharFnGrid(u, v, vals, "empirical", meta)


# ---------------------------------------------------------------------------
# the model characteristic function


def _local_phases(t: float, provider: SatakeProvider, P: int):
    """Per-prime weights and exponents of the local factors up to P.

    Returns (primes, w0, w1, A+, A-) with M_p(u,v) as in the module
    docstring; the A arrays are complex: Re(conj(z) A) = u Re A + v Im A.
    """
    primes = sieve_primes(int(P)).primes
    provider.ensure_covers(primes)
    aplus = np.empty(len(primes), dtype=np.complex128)
    aminus = np.empty(len(primes), dtype=np.complex128)
    for i, p in enumerate(primes):
        p = int(p)
        alphas = provider.alpha(p)
        ps = p * np.exp(1j * t * math.log(p))  # p^{1+it}
        sp = 0j
        sm = 0j
        for a in alphas:
            if abs(a) >= p:
                raise SingularFactorError(
                    f"|alpha| = {abs(a):.6g} >= p = {p}: local factor has a pole"
                )
            sp += a / (ps - a)
            sm += a / (ps + a)
        lp = math.log(p)
        aplus[i] = lp * sp
        aminus[i] = -lp * sm
    pf = primes.astype(np.float64)
    w0 = 1.0 / (pf + 1.0)
    w1 = pf / (2.0 * (pf + 1.0))
    return primes, w0, w1, aplus, aminus


def mp_factor(
    p: int, u: float, v: float, t: float, provider: SatakeProvider
) -> complex:
    """One local factor M_p(u, v); at (0, 0) the three weights sum to 1."""
    p = int(p)
    alphas = provider.alpha(p)
    ps = p * np.exp(1j * t * math.log(p))
    sp = 0j
    sm = 0j
    for a in alphas:
        if abs(a) >= p:
            raise SingularFactorError(
                f"|alpha| = {abs(a):.6g} >= p = {p}: local factor has a pole"
            )
        sp += a / (ps - a)
        sm += a / (ps + a)
    lp = math.log(p)
    aplus = lp * sp
    aminus = -lp * sm
    w0 = 1.0 / (p + 1.0)
    w1 = p / (2.0 * (p + 1.0))
    return complex(
        w0
        + w1 * np.exp(1j * (u * aplus.real + v * aplus.imag))
        + w1 * np.exp(1j * (u * aminus.real + v * aminus.imag))
    )


def phi_rand(
    u: float,
    v: float,
    t: float,
    provider: SatakeProvider,
    P: int = DEFAULT_MODEL_PRIME_CUTOFF,
) -> complex:
    """Product of the local factors over p <= P.

    At the origin every factor is a probability total, so the exact value 1
    is returned without accumulating rounding from the product.
    """
    if u == 0.0 and v == 0.0:
        return 1 + 0j
    _, w0, w1, ap, am = _local_phases(t, provider, P)
    m = (
        w0
        + w1 * np.exp(1j * (u * ap.real + v * ap.imag))
        + w1 * np.exp(1j * (u * am.real + v * am.imag))
    )
    return complex(np.prod(m))


def phi_rand_tail_estimate(
    u: float, v: float, provider: SatakeProvider, P: int
) -> float:
    """Heuristic magnitude of the neglected p > P factors.

    One dyadic block |z| sum_{P < p <= 2P} (log p) p^{theta-2}, extrapolated
    geometrically to the full tail.
    """
    table = sieve_primes(2 * int(P))
    ps = table.primes[table.primes > P].astype(np.float64)
    block = float(np.sum(np.log(ps) * ps ** (provider.theta - 2.0)))
    ratio = 2.0 ** (provider.theta - 1.0)
    return abs(complex(u, v)) * block / (1.0 - ratio)


def model_char_grid(
    t: float,
    provider: SatakeProvider,
    ugrid: np.ndarray,
    vgrid: np.ndarray | None = None,
    P: int = DEFAULT_MODEL_PRIME_CUTOFF,
) -> CharFnGrid:
    """Model characteristic function on a grid, chunked over grid points."""
    u = np.asarray(ugrid, dtype=np.float64)
    primes, w0, w1, ap, am = _local_phases(t, provider, P)
    if vgrid is None:
        uu = u
        vv = np.zeros_like(u)
    else:
        v = np.asarray(vgrid, dtype=np.float64)
        uu = np.repeat(u, len(v))
        vv = np.tile(v, len(u))
    flat = np.empty(len(uu), dtype=np.complex128)
    for lo in range(0, len(uu), _GRID_CHUNK):
        us = uu[lo : lo + _GRID_CHUNK, None]
        vs = vv[lo : lo + _GRID_CHUNK, None]
        m = (
            w0[None, :]
            + w1[None, :] * np.exp(1j * (us * ap.real[None, :] + vs * ap.imag[None, :]))
            + w1[None, :] * np.exp(1j * (us * am.real[None, :] + vs * am.imag[None, :]))
        )
        flat[lo : lo + _GRID_CHUNK] = np.prod(m, axis=1)
    umax = float(np.abs(u).max())
    vmax = 0.0 if vgrid is None else float(np.abs(vgrid).max())
    meta = {
        "prime_cutoff": int(P),
        "t": t,
        "provider": provider.source,
        "tail_estimate": phi_rand_tail_estimate(umax, vmax, provider, P),
    }
    if vgrid is None:
        vals = flat
        _pin_unit(vals, u)
        return CharFnGrid(u, None, vals, "model", meta)
    v = np.asarray(vgrid, dtype=np.float64)
    vals = flat.reshape(len(u), len(v))
    _pin_unit(vals, u, v)
    return CharFnGrid(u, v, vals, "model", meta)


def hat_phi(grid: CharFnGrid, u: float, v: float) -> complex:
    """f(u,v) - f(u,0) f(0,v); vanishes on both axes when f(0,0) = 1."""
    return grid.value_at(u, v) - grid.value_at(u, 0.0) * grid.value_at(0.0, v)


# ---------------------------------------------------------------------------
# Berry-Esseen evaluator


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2.0
    w[1:] += dx / 2.0
    return w


def _axis_proxy_index(grid: np.ndarray, r: float) -> np.ndarray:
    """For each point, itself if |x| > r, else the nearest point with |x| > r.

    Zero (and any |x| <= r) maps to the first point beyond r on the positive
    side when one exists, otherwise on the negative side.
    """
    idx = np.arange(len(grid))
    inside = np.abs(grid) <= r
    if not inside.any():
        return idx
    outside = np.flatnonzero(~inside)
    if len(outside) == 0:
        raise GridCoverageError("all grid points are inside the inner cutoff r")
    for i in np.flatnonzero(inside):
        larger = outside[grid[outside] > r]
        smaller = outside[grid[outside] < -r]
        if grid[i] >= 0.0 and len(larger):
            idx[i] = larger[0]
        elif len(smaller):
            idx[i] = smaller[-1]
        else:
            idx[i] = larger[0]
    return idx


def _restrict(grid: CharFnGrid, R: float):
    u = grid.ugrid
    v = grid.vgrid
    if u.min() > -R + 1e-12 or u.max() < R - 1e-12:
        raise GridCoverageError(f"u-grid does not cover [-{R}, {R}]")
    if v is None or v.min() > -R + 1e-12 or v.max() < R - 1e-12:
        raise GridCoverageError(f"v-grid does not cover [-{R}, {R}]")
    ui = np.flatnonzero(np.abs(u) <= R + 1e-12)
    vi = np.flatnonzero(np.abs(v) <= R + 1e-12)
    return u[ui], v[vi], grid.values[np.ix_(ui, vi)]


def berry_esseen_bound(
    f: CharFnGrid,
    g: CharFnGrid,
    R: float,
    A1: float,
    A2: float,
    r: float = 0.0,
    _stride: int = 1,
) -> float:
    """Numerical right-hand side of the two-dimensional smoothing inequality.

    (2/(2pi)^2) int int |(hat f - hat g)/(uv)| + (2/pi) int |(f-g)(u,0)/u|
    + (2/pi) int |(f-g)(0,v)/v| + C (2(A1+A2)/R), integrals over [-R,R].
    Points with |u| <= r or |v| <= r take the integrand value just outside
    the cutoff (the hats vanish on the axes and are O(|uv|) there, so this
    is the one-sided difference-quotient limit at grid resolution).
    """
    if R <= 0:
        raise ValueError("R must be positive")
    if A1 < 0 or A2 < 0:
        raise ValueError("A1, A2 must be nonnegative")
    uf, vf, F = _restrict(f, R)
    ug, vg, G = _restrict(g, R)
    if len(uf) != len(ug) or len(vf) != len(vg):
        raise GridCoverageError("f and g must share their grids")
    if not (np.allclose(uf, ug) and np.allclose(vf, vg)):
        raise GridCoverageError("f and g must share their grids")
    u, v = uf, vf
    if _stride > 1:
        # rough-grid re-evaluation for the convergence check: keep symmetric
        # endpoints by striding from both ends toward the middle
        keep_u = sorted(set(range(0, len(u), _stride)) | {len(u) - 1})
        keep_v = sorted(set(range(0, len(v), _stride)) | {len(v) - 1})
        u, v = u[keep_u], v[keep_v]
        F = F[np.ix_(keep_u, keep_v)]
        G = G[np.ix_(keep_u, keep_v)]

    iu0 = int(np.argmin(np.abs(u)))
    iv0 = int(np.argmin(np.abs(v)))
    if abs(u[iu0]) > 1e-9 or abs(v[iv0]) > 1e-9:
        raise GridCoverageError("grids must contain the origin")

    hatF = F - np.outer(F[:, iv0], F[iu0, :])
    hatG = G - np.outer(G[:, iv0], G[iu0, :])
    delta = hatF - hatG

    pu = _axis_proxy_index(u, r)
    pv = _axis_proxy_index(v, r)
    num = np.abs(delta[np.ix_(pu, pv)])
    den = np.abs(u[pu])[:, None] * np.abs(v[pv])[None, :]
    integrand = num / den
    wu = _trapezoid_weights(u)
    wv = _trapezoid_weights(v)
    I1 = (2.0 / (2.0 * math.pi) ** 2) * float(wu @ integrand @ wv)

    du = np.abs(F[:, iv0] - G[:, iv0])[pu] / np.abs(u[pu])
    I2 = (2.0 / math.pi) * float(wu @ du)
    dv = np.abs(F[iu0, :] - G[iu0, :])[pv] / np.abs(v[pv])
    I3 = (2.0 / math.pi) * float(wv @ dv)

    smoothing = SADIKOVA_CONSTANT * 2.0 * (A1 + A2) / R
    return I1 + I2 + I3 + smoothing


def berry_esseen_convergence(f, g, R, A1, A2, r=0.0) -> tuple[float, float]:
    """(bound, relative change vs the half-resolution grid)."""
    fine = berry_esseen_bound(f, g, R, A1, A2, r)
    coarse = berry_esseen_bound(f, g, R, A1, A2, r, _stride=2)
    scale = max(abs(fine), 1e-300)
    return fine, abs(fine - coarse) / scale


# ---------------------------------------------------------------------------
# rectangle discrepancy


@dataclass(frozen=True)
class DiscrepancyReport:
    """Corner-CDF sup difference and the rectangle bound it implies.

    rect_bound is 4 x sup in 2D (a rectangle decomposes into four corner
    terms) and 2 x sup in 1D (an interval into two).
    """

    sup_cdf_diff: float
    rect_bound: float
    dimension: int
    grid: str
    meta: dict = field(default_factory=dict)


def _ks_1d(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(a)
    b = np.sort(b)
    allv = np.concatenate([a, b])
    fa_r = np.searchsorted(a, allv, side="right") / len(a)
    fb_r = np.searchsorted(b, allv, side="right") / len(b)
    fa_l = np.searchsorted(a, allv, side="left") / len(a)
    fb_l = np.searchsorted(b, allv, side="left") / len(b)
    return float(
        max(np.abs(fa_r - fb_r).max(), np.abs(fa_l - fb_l).max())
    )


def _corner_sup_2d(ax, ay, bx, by) -> float:
    """Exact sup over the plane of |F_A - F_B| for two weighted point sets.

    Sweeps distinct x values while maintaining the signed y-histogram
    difference; the prefix sums after each sweep step enumerate every value
    the piecewise-constant difference takes, covering both open and closed
    corner conventions.
    """
    wa = 1.0 / len(ax)
    wb = 1.0 / len(bx)
    ys = np.unique(np.concatenate([ay, by]))
    ja = np.searchsorted(ys, ay)
    jb = np.searchsorted(ys, by)
    xs = np.unique(np.concatenate([ax, bx]))
    ia = np.searchsorted(xs, ax)
    ib = np.searchsorted(xs, bx)
    hist = np.zeros(len(ys), dtype=np.float64)
    order_a = np.argsort(ia, kind="stable")
    order_b = np.argsort(ib, kind="stable")
    ia_sorted, ja_sorted = ia[order_a], ja[order_a]
    ib_sorted, jb_sorted = ib[order_b], jb[order_b]
    pa = pb = 0
    best = 0.0
    for step in range(len(xs)):
        qa = pa
        while qa < len(ia_sorted) and ia_sorted[qa] == step:
            qa += 1
        if qa > pa:
            np.add.at(hist, ja_sorted[pa:qa], wa)
            pa = qa
        qb = pb
        while qb < len(ib_sorted) and ib_sorted[qb] == step:
            qb += 1
        if qb > pb:
            np.add.at(hist, jb_sorted[pb:qb], -wb)
            pb = qb
        best = max(best, float(np.abs(np.cumsum(hist)).max()))
    return best


def discrepancy(
    sample_a: ComplexSampleSet,
    sample_b: ComplexSampleSet,
    corner_budget: int = 4000,
    seed: int = 0,
) -> DiscrepancyReport:
    """Sup-CDF distance between two sample sets of matching dimension.

    1D: the exact two-sample sup over merged order statistics.  2D: the
    exact sup for the (possibly subsampled) point sets; sets larger than
    ``corner_budget`` are uniformly subsampled with the given seed, which
    the report records.
    """
    if len(sample_a) == 0 or len(sample_b) == 0:
        raise EmptySampleError("discrepancy needs two nonempty sample sets")
    if sample_a.dimension != sample_b.dimension:
        raise DimensionMismatchError(
            f"dimension {sample_a.dimension} vs {sample_b.dimension}"
        )
    meta = {"A": dict(sample_a.meta), "B": dict(sample_b.meta), "seed": seed}
    if sample_a.dimension == 1:
        sup = _ks_1d(sample_a.values.real, sample_b.values.real)
        grid = f"merged order statistics ({len(sample_a)} vs {len(sample_b)})"
        return DiscrepancyReport(sup, 2.0 * sup, 1, grid, meta)
    va, vb = sample_a.values, sample_b.values
    sub = []
    for idx, (name, v) in enumerate((("A", va), ("B", vb))):
        if len(v) > corner_budget:
            gen = np.random.Generator(np.random.Philox(key=(seed << 1) | idx))
            pick = gen.choice(len(v), size=corner_budget, replace=False)
            pick.sort()
            v = v[pick]
            sub.append(name)
        if name == "A":
            va = v
        else:
            vb = v
    meta["subsampled"] = sub
    sup = _corner_sup_2d(va.real, va.imag, vb.real, vb.imag)
    grid = (
        f"corner sweep over {len(va)}+{len(vb)} points"
        + (f", subsampled to {corner_budget}" if sub else "")
    )
    return DiscrepancyReport(sup, 4.0 * sup, 2, grid, meta)


# ---------------------------------------------------------------------------
# Fourier inversion


@dataclass(frozen=True)
class DensityGrid:
    """Inverted density on a regular grid (1D or 2D)."""

    xgrid: np.ndarray
    ygrid: np.ndarray | None
    density: np.ndarray
    box: float
    step: float
    imag_residue: float
    mass: float

    def validate(self, floor: float = -1e-3, mass_tol: float = 0.01) -> None:
        if float(self.density.min()) < floor:
            raise ValueError(f"density dips to {self.density.min():.4g}")
        if abs(self.mass - 1.0) > mass_tol:
            raise ValueError(f"total mass {self.mass:.6g} not within {mass_tol} of 1")


def invert_density(
    grid: CharFnGrid,
    U: float,
    xgrid: np.ndarray,
    ygrid: np.ndarray | None = None,
    decay_tol: float = 1e-4,
    validate: bool = True,
) -> DensityGrid:
    """Trapezoid Fourier inversion of a characteristic-function grid.

    1D: M(x) = (1/2pi) int_{-U}^{U} e^{-iux} phi(u) du; 2D uses the square
    box and the (1/2pi)^2 normalisation.  Requires |phi| < decay_tol at the
    box boundary, raising InsufficientDecayError (enlarge U) otherwise.  The
    imaginary residue of the inversion must stay below 1e-6.
    """
    xs = np.asarray(xgrid, dtype=np.float64)
    u = grid.ugrid
    if u.min() > -U + 1e-12 or u.max() < U - 1e-12:
        raise GridCoverageError(f"grid does not cover [-{U}, {U}]")
    ui = np.flatnonzero(np.abs(u) <= U + 1e-12)
    uu = u[ui]
    if grid.is_1d:
        if ygrid is not None:
            raise ValueError("1D grid cannot produce a 2D density")
        phi = grid.values[ui]
        edge = max(abs(phi[0]), abs(phi[-1]))
        if edge >= decay_tol:
            raise InsufficientDecayError(
                f"|phi| = {edge:.3g} at the boundary |u| = {U}; enlarge U"
            )
        w = _trapezoid_weights(uu)
        core = np.exp(-1j * np.outer(xs, uu)) @ (w * phi) / (2.0 * math.pi)
        resid = float(np.abs(core.imag).max())
        dens = core.real
        mass = float(np.dot(_trapezoid_weights(xs), dens))
        out = DensityGrid(
            xs, None, dens, float(U), float(np.diff(uu).max()), resid, mass
        )
    else:
        if ygrid is None:
            raise ValueError("2D grid needs an output ygrid")
        ys = np.asarray(ygrid, dtype=np.float64)
        v = grid.vgrid
        if v.min() > -U + 1e-12 or v.max() < U - 1e-12:
            raise GridCoverageError(f"grid does not cover [-{U}, {U}]^2")
        vi = np.flatnonzero(np.abs(v) <= U + 1e-12)
        vv = v[vi]
        phi = grid.values[np.ix_(ui, vi)]
        edge = max(
            float(np.abs(phi[0, :]).max()),
            float(np.abs(phi[-1, :]).max()),
            float(np.abs(phi[:, 0]).max()),
            float(np.abs(phi[:, -1]).max()),
        )
        if edge >= decay_tol:
            raise InsufficientDecayError(
                f"|phi| = {edge:.3g} on the boundary of [-{U}, {U}]^2; enlarge U"
            )
        wu = _trapezoid_weights(uu)
        wv = _trapezoid_weights(vv)
        ex = np.exp(-1j * np.outer(xs, uu))
        ey = np.exp(-1j * np.outer(ys, vv))
        core = ex @ (phi * np.outer(wu, wv)) @ ey.T / (2.0 * math.pi) ** 2
        resid = float(np.abs(core.imag).max())
        dens = core.real
        mass = float(
            _trapezoid_weights(xs) @ dens @ _trapezoid_weights(ys)
        )
        out = DensityGrid(
            xs,
            ys,
            dens,
            float(U),
            float(max(np.diff(uu).max(), np.diff(vv).max())),
            resid,
            mass,
        )
    if out.imag_residue > 1e-6:
        raise ValueError(
            f"imaginary residue {out.imag_residue:.3g} exceeds 1e-6; "
            "input grid is not conjugate-symmetric"
        )
    if validate:
        out.validate()
    return out


def choose_inversion_box(
    phi, decay_tol: float = 1e-4, start: float = 8.0, max_box: float = 4096.0
) -> float:
    """Smallest power-of-two multiple of ``start`` with |phi(+-U)| well below
    the decay tolerance."""
    U = float(start)
    while U <= max_box:
        if max(abs(phi(U)), abs(phi(-U))) < decay_tol * 1e-2:
            return U
        U *= 2.0
    raise InsufficientDecayError(f"no decay below {decay_tol} up to U = {max_box}")


# ---------------------------------------------------------------------------
# small values and prime-sum diagnostics


def small_values(samples: ComplexSampleSet, eta: float) -> tuple[int, float]:
    """(number of values with |w| <= eta, minimum modulus of the set)."""
    if len(samples) == 0:
        raise EmptySampleError("empty sample set")
    if eta <= 0:
        raise ValueError("eta must be positive")
    mags = np.abs(samples.values)
    return int(np.count_nonzero(mags <= eta)), float(mags.min())


@dataclass(frozen=True)
class PrimeSumDiagnostics:
    """Tail prime sums over X < p <= P next to their theoretical comparators.

    ``abs_tail``  : sum (log p)^2 |lam(p)|^2 / p^2         ~ (log X)/X
    ``twist_tail``: sum (log p)^2 lam(p)^2 / p^{2+2it}
                    ~ (log X)/((1-2it+i tau0) X^{1-2it+i tau0}) when the
                    provider declares a self-dual twist tau0.
    """

    X: float
    P: float
    abs_tail: float
    abs_comparator: float
    twist_tail: complex
    twist_comparator: complex | None


def prime_sum_diagnostics(
    provider: SatakeProvider, X: float, P: float, t: float = 0.0
) -> PrimeSumDiagnostics:
    if P < X:
        raise ValueError("P must be >= X")
    table = sieve_primes(int(P))
    primes = table.primes[table.primes > X]
    provider.ensure_covers(primes)
    abs_tail = 0.0
    twist_tail = 0j
    for p in primes:
        p = int(p)
        lam = provider.lam(p, 1)
        lp2 = math.log(p) ** 2
        abs_tail += lp2 * abs(lam) ** 2 / p**2
        twist_tail += lp2 * lam * lam * p ** complex(-2.0, -2.0 * t)
    abs_comp = math.log(X) / X if X > 1 else float("nan")
    twist_comp = None
    if provider.self_dual_twist is not None and X > 1:
        tau0 = provider.self_dual_twist
        s = complex(1.0, -2.0 * t + tau0)
        twist_comp = math.log(X) / (s * X**s)
    return PrimeSumDiagnostics(
        float(X), float(P), abs_tail, abs_comp, complex(twist_tail), twist_comp
    )
