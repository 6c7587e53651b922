"""Coherent states on the quantum torus and Husimi phase-space densities.

The coherent state at (x0, xi0) is the periodized Gaussian

    c_j ~ sum_m e^{-2 pi i theta_1 m} g((j + theta_2)/N + m),
    g(x) = exp(-(x - x0)^2 / (2 sigma^2) - 2 pi i N xi0 (x - x0)),

oriented so that <Op(e^{2 pi i xi}) c, c> ~ e^{2 pi i xi0}, i.e. the
quantization module and the Husimi field agree on which point of phase space
the state occupies.  The sum is truncated once the tail drops below 6 standard deviations
(< 1e-12 mass).  The Husimi field of a unit vector u is N |<c_rho, u>|^2
sampled on a W x H grid; with sigma = sqrt(h) the coherent family resolves
the identity, so the raw grid quadrature integrates to 1 up to a percent-level
discretization error.  Fields are renormalized to total mass exactly 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateState, IoFailure, NotNormalized
from .quantization import QuantumTorus


@dataclass(frozen=True)
class CoherentSpec:
    """Center and width of a torus coherent state; sigma defaults to sqrt(h)."""

    center: tuple[float, float]
    sigma: float | None = None

    def resolved_sigma(self, qt: QuantumTorus) -> float:
        s = math.sqrt(qt.h) if self.sigma is None else float(self.sigma)
        if not (qt.h <= s <= 1.0):
            raise ValueError(f"sigma={s} outside [h, 1] = [{qt.h}, 1]")
        return s


@dataclass(frozen=True)
class HusimiField:
    """Nonnegative W x H phase-space density with uniform quadrature weights.

    values[i, j] samples the point (i/W, j/H); raw_mass records the quadrature
    total before renormalization (a resolution-of-identity diagnostic).
    """

    values: np.ndarray
    weight: float
    raw_mass: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * self.weight)

    def mass_in(self, mask: np.ndarray) -> float:
        return float(self.values[mask].sum() * self.weight)


def coherent_batch(
    qt: QuantumTorus, centers: np.ndarray, sigma: float
) -> np.ndarray:
    """Stack of normalized coherent states, one row per center (B x N)."""
    N = qt.N
    t1, t2 = qt.theta
    x0 = np.asarray(centers, dtype=float)[:, 0][:, None, None]
    e0 = np.asarray(centers, dtype=float)[:, 1][:, None, None]
    xj = ((np.arange(N) + t2) / N)[None, :, None]
    reach = int(math.ceil(6.0 * sigma)) + 1
    m = np.arange(-reach, reach + 1)[None, None, :]
    dx = xj + m - x0
    amp = np.exp(-(dx**2) / (2.0 * sigma * sigma))
    phase = -2.0 * math.pi * (qt.N * e0 * dx + t1 * m)
    states = (amp * np.exp(1j * phase)).sum(axis=2)
    norms = np.linalg.norm(states, axis=1)
    if np.any(norms < 1e-12):
        raise DegenerateState("coherent state collapsed; sigma out of range?")
    return states / norms[:, None]


def coherent_state(qt: QuantumTorus, spec: CoherentSpec) -> np.ndarray:
    """Unit-norm coherent state at spec.center."""
    sigma = spec.resolved_sigma(qt)
    return coherent_batch(qt, np.array([spec.center]), sigma)[0]


def husimi_at(
    qt: QuantumTorus,
    u: np.ndarray,
    points: np.ndarray,
    sigma: float | None = None,
    chunk: int = 4096,
) -> np.ndarray:
    """Raw Husimi values N |<c_p, u>|^2 at arbitrary phase-space points."""
    sigma = CoherentSpec((0.0, 0.0), sigma).resolved_sigma(qt)
    u = np.asarray(u, dtype=complex)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        block = coherent_batch(qt, pts[lo : lo + chunk], sigma)
        out[lo : lo + chunk] = qt.N * np.abs(block.conj() @ u) ** 2
    return out


def husimi(
    qt: QuantumTorus,
    u: np.ndarray,
    W: int = 128,
    H: int = 128,
    sigma: float | None = None,
) -> HusimiField:
    """Husimi field of a unit vector on the (i/W, j/H) grid."""
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise NotNormalized(f"|u| = {np.linalg.norm(u)!r}")
    xs = np.arange(W) / W
    es = np.arange(H) / H
    X, E = np.meshgrid(xs, es, indexing="ij")
    pts = np.stack([X.ravel(), E.ravel()], axis=1)
    vals = husimi_at(qt, u, pts, sigma=sigma).reshape(W, H)
    weight = 1.0 / (W * H)
    raw = float(vals.sum() * weight)
    if raw <= 0.0:
        raise DegenerateState("Husimi field has zero mass")
    return HusimiField(values=vals / raw, weight=weight, raw_mass=raw)


def ball_mask(
    W: int, H: int, points: np.ndarray, r: float
) -> np.ndarray:
    """Grid mask of the union of torus-metric r-balls around the points."""
    xs = np.arange(W) / W
    es = np.arange(H) / H
    X, E = np.meshgrid(xs, es, indexing="ij")
    mask = np.zeros((W, H), dtype=bool)
    for px, pe in np.asarray(points, dtype=float).reshape(-1, 2):
        dx = np.abs(X - px)
        dx = np.minimum(dx, 1.0 - dx)
        de = np.abs(E - pe)
        de = np.minimum(de, 1.0 - de)
        mask |= dx * dx + de * de <= r * r
    return mask


def render_log_heatmap(field: HusimiField, floor_db: float, path: str) -> None:
    """Write the field as an 8-bit binary PGM on a log10 scale.

    Pixel value is clamp(log10(v / max), floor_db/10, 0) mapped affinely to
    0..255.  Rows run from high xi to low so the image reads like a phase
    portrait (x rightward, xi upward).  Output bytes are deterministic.
    """
    if floor_db >= 0:
        raise ValueError("floor_db must be negative")
    v = field.values
    top = float(v.max())
    lo = floor_db / 10.0
    with np.errstate(divide="ignore"):
        logv = np.log10(np.where(v > 0, v / top, 10.0**lo))
    logv = np.clip(logv, lo, 0.0)
    img = np.rint((logv - lo) / (0.0 - lo) * 255.0).astype(np.uint8)
    img = img.T[::-1, :]  # row = descending xi, column = x
    H, W = img.shape
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{W} {H}\n255\n".encode("ascii"))
            fh.write(img.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
