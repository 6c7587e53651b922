"""Exact dynamics of hyperbolic toral automorphisms (cat maps).

Everything that can be done in integer or rational arithmetic is: orbit
enumeration, periods modulo m, and the special-N scan never touch floating
point.  Floating point appears only in the eigen-data and in the survivor
masks, which sample cell centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import NotHyperbolic, NotUnimodular


@dataclass(frozen=True)
class CatMatrix:
    """2x2 integer matrix with det 1 and |trace| > 2 (row-major a,b,c,d)."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if v != int(v):
                raise NotUnimodular(f"entries must be integers, got {v!r}")
        if self.det != 1:
            raise NotUnimodular(f"det = {self.det}, need 1")
        if abs(self.trace) <= 2:
            raise NotHyperbolic(f"|trace| = {abs(self.trace)} <= 2")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)

    def inverse_entries(self) -> tuple[int, int, int, int]:
        """Entries of A^{-1}, exact since det = 1."""
        return self.d, -self.b, -self.c, self.a

    def apply(self, p1: int, p2: int) -> tuple[int, int]:
        """Integer image (a p1 + b p2, c p1 + d p2)."""
        return self.a * p1 + self.b * p2, self.c * p1 + self.d * p2

    def apply_inverse(self, p1: int, p2: int) -> tuple[int, int]:
        d, mb, mc, a = self.inverse_entries()
        return d * p1 + mb * p2, mc * p1 + a * p2


@dataclass(frozen=True)
class HyperbolicData:
    """Eigen-data of a cat matrix.

    lambda_plus is the eigenvalue of largest modulus; it is negative when
    trace < -2.  The expansion rate is abs(lambda_plus) and the entropy of
    Lebesgue measure is log abs(lambda_plus).
    """

    lambda_plus: float
    lambda_minus: float
    unstable_dir: np.ndarray
    stable_dir: np.ndarray
    entropy: float


@dataclass(frozen=True)
class RationalPoint:
    """Point (p1/q, p2/q) on the torus, reduced so 0 <= p1, p2 < q."""

    p1: int
    p2: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("denominator must be positive")
        if not (0 <= self.p1 < self.q and 0 <= self.p2 < self.q):
            raise ValueError("numerators must be reduced mod q")

    @classmethod
    def from_fractions(cls, x: Fraction, xi: Fraction) -> "RationalPoint":
        q = math.lcm(x.denominator, xi.denominator)
        return cls(int(x * q) % q, int(xi * q) % q, q)

    def as_fractions(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.p1, self.q), Fraction(self.p2, self.q)

    def as_floats(self) -> tuple[float, float]:
        return self.p1 / self.q, self.p2 / self.q


@dataclass(frozen=True)
class PeriodicOrbit:
    """Cyclic orbit x, Ax, ..., A^{period-1} x of a rational point."""

    points: tuple[RationalPoint, ...]
    period: int

    def __post_init__(self):
        if self.period != len(self.points) or self.period < 1:
            raise ValueError("period must equal the number of points")
        if len(set(self.points)) != self.period:
            raise ValueError("orbit points must be distinct")


@dataclass(frozen=True)
class HoleRegion:
    """Open axis-aligned box (x_lo, x_hi) x (xi_lo, xi_hi) inside [0,1)^2."""

    x_interval: tuple[float, float]
    xi_interval: tuple[float, float]

    def __post_init__(self):
        for lo, hi in (self.x_interval, self.xi_interval):
            if not (0.0 <= lo < hi <= 1.0):
                raise ValueError(
                    f"interval ({lo}, {hi}) must have nonempty interior in [0,1)"
                )

    def contains(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Vectorized open-box membership."""
        (xl, xh), (el, eh) = self.x_interval, self.xi_interval
        return (x > xl) & (x < xh) & (xi > el) & (xi < eh)

    @property
    def area(self) -> float:
        return (self.x_interval[1] - self.x_interval[0]) * (
            self.xi_interval[1] - self.xi_interval[0]
        )


def validate_cat(m: Sequence[Sequence[int]] | np.ndarray) -> CatMatrix:
    """Check det = 1 and |trace| > 2, return the CatMatrix.

    Raises NotUnimodular or NotHyperbolic otherwise; |trace| = 2 (parabolic)
    is rejected together with the elliptic case.
    """
    arr = np.asarray(m)
    if arr.shape != (2, 2):
        raise NotUnimodular(f"expected a 2x2 matrix, got shape {arr.shape}")
    a, b, c, d = (int(arr[0, 0]), int(arr[0, 1]), int(arr[1, 0]), int(arr[1, 1]))
    if not np.array_equal(arr, [[a, b], [c, d]]):
        raise NotUnimodular("matrix entries must be integers")
    return CatMatrix(a, b, c, d)


def hyperbolic_data(A: CatMatrix) -> HyperbolicData:
    """Eigenvalues and stable/unstable directions of A.

    The characteristic polynomial is t^2 - tr t + 1, so the eigenvalues are
    (tr +- sqrt(tr^2 - 4))/2 and multiply to 1.
    """
    tr = A.trace
    disc = math.sqrt(tr * tr - 4)
    if tr > 0:
        lam_plus = (tr + disc) / 2.0
    else:
        lam_plus = (tr - disc) / 2.0
    lam_minus = 1.0 / lam_plus

    def eigvec(lam: float) -> np.ndarray:
        # (A - lam) v = 0; pick the numerically larger row expression.
        v1 = np.array([A.b, lam - A.a], dtype=float)
        v2 = np.array([lam - A.d, A.c], dtype=float)
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        return v / np.linalg.norm(v)

    return HyperbolicData(
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        unstable_dir=eigvec(lam_plus),
        stable_dir=eigvec(lam_minus),
        entropy=math.log(abs(lam_plus)),
    )


def iterate(A: CatMatrix, x, t: int = 1):
    """A^t x mod 1.  Exact for RationalPoint input, floating point otherwise.

    Negative t uses the exact integer inverse of A.
    """
    if isinstance(x, RationalPoint):
        p1, p2, q = x.p1, x.p2, x.q
        step = A.apply if t >= 0 else A.apply_inverse
        for _ in range(abs(t)):
            p1, p2 = step(p1, p2)
            p1 %= q
            p2 %= q
        return RationalPoint(p1, p2, q)
    x1, x2 = float(x[0]), float(x[1])
    if t >= 0:
        a, b, c, d = A.a, A.b, A.c, A.d
    else:
        a, b, c, d = A.inverse_entries()
    for _ in range(abs(t)):
        x1, x2 = (a * x1 + b * x2) % 1.0, (c * x1 + d * x2) % 1.0
    return (x1, x2)


def orbit_of_rational(A: CatMatrix, x: RationalPoint) -> PeriodicOrbit:
    """Forward orbit of x until first return.

    Every rational point is periodic: A permutes the finite set (Z/q)^2.
    """
    points = [x]
    cur = iterate(A, x, 1)
    while cur != x:
        points.append(cur)
        cur = iterate(A, cur, 1)
    return PeriodicOrbit(points=tuple(points), period=len(points))


def period_mod(A: CatMatrix, m: int, k_max: int | None = None) -> int | None:
    """Least k >= 1 with A^k = I mod m.

    Exists because A is invertible mod m.  With k_max given, returns None
    when the period exceeds k_max (used by the special-N scan).
    """
    if m < 1:
        raise ValueError("modulus must be >= 1")
    if m == 1:
        return 1
    a, b, c, d = A.a % m, A.b % m, A.c % m, A.d % m
    pa, pb, pc, pd = a, b, c, d
    bound = k_max if k_max is not None else 6 * m * m * m
    for k in range(1, bound + 1):
        if pa == 1 and pd == 1 and pb == 0 and pc == 0:
            return k
        pa, pb, pc, pd = (
            (pa * a + pb * c) % m,
            (pa * b + pb * d) % m,
            (pc * a + pd * c) % m,
            (pc * b + pd * d) % m,
        )
    if k_max is not None:
        return None
    raise RuntimeError(f"period mod {m} not found below {bound}")  # pragma: no cover


def special_N_scan(
    A: CatMatrix, N_range: Iterable[int], k_max: int
) -> list[tuple[int, int]]:
    """All N in range with period_mod(A, 2N) <= k_max, sorted by period.

    These are the candidate dimensions for anomalously short quantum periods
    (the scarring construction needs k of order log N).
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    hits = []
    for N in N_range:
        k = period_mod(A, 2 * N, k_max=k_max)
        if k is not None:
            hits.append((N, k))
    hits.sort(key=lambda nk: (nk[1], nk[0]))
    return hits


def ks_entropy_mixture(alpha: float, A: CatMatrix) -> float:
    """KS entropy of alpha * Lebesgue + (1 - alpha) * (periodic-orbit measure).

    KS entropy is affine in the measure; orbit measures have entropy 0 and
    Lebesgue has log |lambda_plus|, so the mixture has alpha * log |lambda_plus|.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    return alpha * hyperbolic_data(A).entropy


def survivor_mask(
    A: CatMatrix,
    hole: HoleRegion,
    T: int,
    grid: tuple[int, int] = (256, 256),
    direction: str = "backward",
) -> np.ndarray:
    """Boolean W x H grid of cells whose center orbit avoids the hole.

    direction='backward' tests A^{-j} for j = 0..T (the Omega_+ convention),
    'forward' tests A^{+j} (Omega_-).  Cell centers only, no interval
    arithmetic; mask[i, j] covers the cell at x ~ (i+.5)/W, xi ~ (j+.5)/H.
    """
    if T < 0:
        raise ValueError("T must be >= 0")
    W, H = grid
    if W < 2 or H < 2:
        raise ValueError("grid must be at least 2x2")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    xs = (np.arange(W) + 0.5) / W
    es = (np.arange(H) + 0.5) / H
    X, E = np.meshgrid(xs, es, indexing="ij")
    x = X.ravel().copy()
    xi = E.ravel().copy()
    alive = np.ones(x.shape, dtype=bool)
    if direction == "forward":
        a, b, c, d = A.a, A.b, A.c, A.d
    else:
        a, b, c, d = A.inverse_entries()
    for j in range(T + 1):
        alive &= ~hole.contains(x, xi)
        if j < T:
            x, xi = (a * x + b * xi) % 1.0, (c * x + d * xi) % 1.0
    return alive.reshape(W, H)


def ehrenfest_steps(A: CatMatrix, N: int) -> int:
    """floor(log N / log |lambda_plus|), the orbit length used for Omega+-."""
    return int(math.floor(math.log(N) / hyperbolic_data(A).entropy))
