"""Discrete fractal-uncertainty-principle experiments.

The continuous estimate ||1_X f|| <= C h^beta ||f|| for functions with
h-porous support and frequency sets is modeled by the largest singular value
of a row/column submatrix of the unitary DFT F_N, identifying a subset of
Z_N with an h-resolution subset of [0, 1) at h = 1/N.  Porosity checks run
over dyadic test windows covering all lengths in [1/N, 1]; the reported
porosity constant is the infimum over windows of (largest gap)/(window
length), rounded to the 1e-3 report resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arithmetic import CatMatrix, HoleRegion, ehrenfest_steps, hyperbolic_data
from .errors import BadAlphabet, DimensionMismatch, InsufficientData

_NU_RESOLUTION = 1e-3


@dataclass(frozen=True)
class IndexSet:
    """Sorted distinct indices in [0, N), modeling the set indices/N in [0,1)."""

    N: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if idx and not (0 <= idx[0] and idx[-1] < self.N):
            raise ValueError("indices out of range [0, N)")
        object.__setattr__(self, "indices", idx)

    def points(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=float) / self.N

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class PorosityReport:
    """Outcome of a porosity check at a requested constant nu.

    sup_nu is the implementation-reported largest constant that would pass
    (window-infimum of gap ratios); witness_interval is a failing window when
    holds is False.
    """

    nu: float
    scale: float
    holds: bool
    sup_nu: float
    witness_interval: tuple[float, float] | None


@dataclass(frozen=True)
class FupCurve:
    """(N, norm) rows with the fitted power law norm ~ C N^{-beta}."""

    rows: tuple[tuple[int, float], ...]
    beta: float
    C: float
    residual: float

    @classmethod
    def fit(cls, rows) -> "FupCurve":
        beta, C, residual = estimate_beta(rows)
        return cls(rows=tuple((int(n), float(v)) for n, v in rows), beta=beta, C=C, residual=residual)


def cantor_set(base: int, digits, levels: int) -> IndexSet:
    """All `levels`-digit base-`base` strings over the digit alphabet.

    N = base**levels; e.g. base 3 with digits {0, 2} gives the mid-third
    Cantor iterates.
    """
    digits = tuple(sorted(set(int(d) for d in digits)))
    if base < 2:
        raise BadAlphabet(f"base {base} < 2")
    if not digits or len(digits) >= base:
        raise BadAlphabet("digit set must be a nonempty proper subset of 0..base-1")
    if digits[0] < 0 or digits[-1] >= base:
        raise BadAlphabet(f"digits {digits} out of range for base {base}")
    if levels < 1:
        raise BadAlphabet("levels must be >= 1")
    idx = [0]
    for _ in range(levels):
        idx = [i * base + d for i in idx for d in digits]
    return IndexSet(N=base**levels, indices=tuple(idx))


class _RangeMax:
    """Sparse-table range-maximum queries over a fixed array, vectorized."""

    def __init__(self, values: np.ndarray):
        self.n = len(values)
        self.tables = [np.asarray(values, dtype=float)]
        size = 1
        while 2 * size <= self.n:
            prev = self.tables[-1]
            self.tables.append(np.maximum(prev[: len(prev) - size], prev[size:]))
            size *= 2

    def query(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Max over [lo, hi); empty ranges give 0."""
        out = np.zeros(len(lo))
        length = hi - lo
        ok = length > 0
        if not np.any(ok) or self.n == 0:
            return out
        lv = np.zeros(len(lo), dtype=int)
        lv[ok] = np.floor(np.log2(length[ok])).astype(int)
        for level in range(len(self.tables)):
            sel = ok & (lv == level)
            if not np.any(sel):
                continue
            t = self.tables[level]
            a = t[lo[sel]]
            b = t[hi[sel] - (1 << level)]
            out[sel] = np.maximum(a, b)
        return out


def _window_gap_ratios(points: np.ndarray, length: float, starts: np.ndarray):
    """Largest admissible gap / window length, per window [a, a + length]."""
    if len(points) == 0:
        return np.ones(len(starts))
    ends = starts + length
    gaps = np.diff(points)
    rmq = _RangeMax(gaps)
    lo = np.searchsorted(points, starts, side="left")
    hi = np.searchsorted(points, ends, side="right")  # points[lo:hi] inside
    empty = lo >= hi
    first = np.where(empty, 0.0, points[np.minimum(lo, len(points) - 1)] - starts)
    last = np.where(empty, 0.0, ends - points[np.maximum(hi - 1, 0)])
    inner = rmq.query(lo, np.maximum(hi - 1, lo))
    best = np.maximum(np.maximum(first, last), inner)
    best[empty] = length
    return best / length


def porosity_profile(s: IndexSet, n_intervals: int | None = None):
    """Infimum of gap ratios over dyadic windows of all lengths in [1/N, 1].

    Returns (sup_nu, worst_window).  sup_nu is the largest nu for which the
    set is nu-porous up to scale 1/N under the dyadic-window test.
    """
    pts = s.points()
    best_ratio = math.inf
    worst = (0.0, 1.0)
    levels = max(1, math.ceil(math.log2(s.N)))
    per_level = None if n_intervals is None else max(1, n_intervals // (levels + 1))
    for m in range(levels + 1):
        length = min(1.0, (2.0**m) / s.N)
        count = max(1, math.ceil(s.N / (2.0**m)))
        starts = np.minimum(np.arange(count) * length, 1.0 - length)
        if per_level is not None and count > per_level:
            starts = starts[:: max(1, count // per_level)]
        ratios = _window_gap_ratios(pts, length, starts)
        j = int(np.argmin(ratios))
        if ratios[j] < best_ratio:
            best_ratio = float(ratios[j])
            worst = (float(starts[j]), float(starts[j] + length))
        if length >= 1.0:
            break
    return best_ratio, worst


def porosity_check(
    s: IndexSet, nu: float, n_intervals: int | None = None
) -> PorosityReport:
    """Verify nu-porosity of indices/N up to scale 1/N on dyadic windows."""
    if not 0.0 < nu < 1.0:
        raise ValueError("nu must lie in (0, 1)")
    sup_nu, worst = porosity_profile(s, n_intervals)
    holds = sup_nu >= nu
    return PorosityReport(
        nu=nu,
        scale=1.0 / s.N,
        holds=holds,
        sup_nu=math.floor(sup_nu / _NU_RESOLUTION) * _NU_RESOLUTION,
        witness_interval=None if holds else worst,
    )


def dft_submatrix(X: IndexSet, Y: IndexSet) -> np.ndarray:
    """Rows X, columns Y of the unitary DFT F_N[j,k] = e^{-2 pi i jk/N}/sqrt(N)."""
    if X.N != Y.N:
        raise DimensionMismatch(f"moduli differ: {X.N} != {Y.N}")
    rows = np.asarray(X.indices)[:, None]
    cols = np.asarray(Y.indices)[None, :]
    return np.exp(-2j * np.pi * rows * cols / X.N) / math.sqrt(X.N)


def fup_norm(X: IndexSet, Y: IndexSet) -> float:
    """|| 1_X F_N 1_Y ||, the largest singular value of the DFT submatrix."""
    if len(X) == 0 or len(Y) == 0:
        return 0.0
    return float(np.linalg.svd(dft_submatrix(X, Y), compute_uv=False)[0])


def fup_norm_2d(
    X: tuple[IndexSet, IndexSet], Y: tuple[IndexSet, IndexSet]
) -> float:
    """|| 1_X F_{N^2} 1_Y || for product sets X, Y in (Z_N)^2.

    The 2-D DFT factorizes as F_N x F_N, so the norm is the product of the
    two 1-D submatrix norms.
    """
    return fup_norm(X[0], Y[0]) * fup_norm(X[1], Y[1])


def product_counterexample_norm(N: int, thickness: int = 1) -> float:
    """Norm for the stripe pair X = [0, w) x all, Y = all x [0, w).

    Both stripes are 1/10-porous as subsets of the plane, yet the norm stays
    at 1: the 2-D statement fails for product sets, which is the documented
    obstruction to naive higher-dimensional uncertainty principles.
    """
    w = max(1, thickness)
    full = IndexSet(N, tuple(range(N)))
    thin = IndexSet(N, tuple(range(w)))
    return fup_norm_2d((thin, full), (full, thin))


def estimate_beta(rows) -> tuple[float, float, float]:
    """Least squares for log norm = log C - beta log N.

    Returns (beta, C, rms residual in log space).
    """
    rows = [(int(n), float(v)) for n, v in rows]
    if len(rows) < 3:
        raise InsufficientData(f"need >= 3 rows, got {len(rows)}")
    if any(v <= 0.0 for _, v in rows):
        raise InsufficientData("norms must be positive")
    logn = np.log([n for n, _ in rows])
    logv = np.log([v for _, v in rows])
    slope, intercept = np.polyfit(logn, logv, 1)
    pred = slope * logn + intercept
    residual = float(np.sqrt(np.mean((logv - pred) ** 2)))
    return float(-slope), float(math.exp(intercept)), residual


def volume_bound(X: IndexSet, Y: IndexSet) -> float:
    """Frobenius bound min(1, sqrt(|X||Y|/N)); fitted slopes beating the
    corresponding exponent indicate genuine uncertainty-principle decay."""
    return min(1.0, math.sqrt(len(X) * len(Y) / X.N))


def cantor_curve(base: int, digits, max_level: int) -> FupCurve:
    """fup_norm along the self-similar family X = Y = Cantor(base, digits, k)."""
    rows = []
    for k in range(1, max_level + 1):
        X = cantor_set(base, digits, k)
        rows.append((X.N, fup_norm(X, X)))
    return FupCurve.fit(rows)


def _section_survivors(
    A: CatMatrix,
    hole: HoleRegion,
    anchor: np.ndarray,
    direction: np.ndarray,
    M: int,
    T: int,
    backward: bool,
) -> IndexSet:
    """Survivor indices along the line anchor + (i/M) * direction."""
    t = np.arange(M) / M
    x = (anchor[0] + t * direction[0]) % 1.0
    xi = (anchor[1] + t * direction[1]) % 1.0
    alive = np.ones(M, dtype=bool)
    a, b, c, d = A.inverse_entries() if backward else (A.a, A.b, A.c, A.d)
    for j in range(T + 1):
        alive &= ~hole.contains(x, xi)
        if j < T:
            x, xi = (a * x + b * xi) % 1.0, (c * x + d * xi) % 1.0
    return IndexSet(M, tuple(np.nonzero(alive)[0].tolist()))


def omega_porosity(
    A: CatMatrix,
    hole: HoleRegion,
    N: int,
    samples: int = 6,
    seed: int = 0,
    omega: str = "+",
) -> dict[str, PorosityReport]:
    """Porosity of 1-D sections of Omega+-(N) along both invariant directions.

    Omega_+ (backward survivors up to the Ehrenfest-type time) is expected to
    be porous along the stable direction and to fail porosity along the
    unstable one; Omega_- swaps the roles.  The report per direction carries
    the worst sup-nu over `samples` random sections at resolution 1/N.
    """
    if omega not in ("+", "-"):
        raise ValueError("omega must be '+' or '-'")
    hd = hyperbolic_data(A)
    T = ehrenfest_steps(A, N)
    backward = omega == "+"
    rng = np.random.default_rng(seed)
    out: dict[str, PorosityReport] = {}
    for name, direction in (("stable", hd.stable_dir), ("unstable", hd.unstable_dir)):
        worst_sup = math.inf
        worst_window = (0.0, 1.0)
        for _ in range(samples):
            anchor = rng.random(2)
            sec = _section_survivors(A, hole, anchor, direction, N, T, backward)
            sup, window = porosity_profile(sec)
            if sup < worst_sup:
                worst_sup, worst_window = sup, window
        holds = worst_sup >= _NU_RESOLUTION
        out[name] = PorosityReport(
            nu=math.floor(worst_sup / _NU_RESOLUTION) * _NU_RESOLUTION,
            scale=1.0 / N,
            holds=holds,
            sup_nu=math.floor(worst_sup / _NU_RESOLUTION) * _NU_RESOLUTION,
            witness_interval=None if holds else worst_window,
        )
    return out
