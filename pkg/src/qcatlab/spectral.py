"""Eigen-analysis of quantum cat maps.

Covers the full unitary eigendecomposition (complex Schur form, which keeps
the basis orthonormal inside the large eigenphase clusters that appear at
special N), the quantum-ergodicity variance statistic, time-averaged scarred
states, Husimi mass on orbit neighborhoods, and the empirical full-support
scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .arithmetic import CatMatrix, HoleRegion, PeriodicOrbit
from .errors import ConvergenceFailure, DegenerateProjection, PeriodNotFound, PeriodNotScalar
from .phasespace import ball_mask, coherent_batch, coherent_state, CoherentSpec, husimi
from .propagator import Propagator, build_propagator, quantum_period
from .quantization import QuantumTorus, TorusSymbol, quantize

_RESIDUAL_TOL = 1e-9
_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    """Orthonormal eigenbasis of B with phases sorted in [0, 2 pi).

    clusters groups indices whose phases are closer than the degeneracy
    tolerance; at special N the cluster sizes reveal the high multiplicity.
    """

    eigenphases: np.ndarray
    eigenvectors: np.ndarray
    residual: float
    clusters: tuple[tuple[int, ...], ...]

    @property
    def N(self) -> int:
        return len(self.eigenphases)


@dataclass(frozen=True)
class QEReport:
    """Variance of eigenbasis matrix elements against one symbol, per N."""

    symbol_id: str
    rows: tuple[tuple[int, float, float], ...]  # (N, variance, max deviation)

    def fitted_slope(self) -> float:
        ns = np.array([r[0] for r in self.rows], dtype=float)
        vs = np.array([r[1] for r in self.rows], dtype=float)
        return float(np.polyfit(np.log(ns), np.log(vs), 1)[0])


@dataclass(frozen=True)
class ScarReport:
    N: int
    orbit_points: tuple[tuple[float, float], ...]
    radius: float
    orbit_mass: float
    baseline: float
    eigenphase: float


def _cluster_phases(phases: np.ndarray, tol: float) -> tuple[tuple[int, ...], ...]:
    """Group sorted phases by circular proximity."""
    n = len(phases)
    if n == 0:
        return ()
    groups: list[list[int]] = [[0]]
    for i in range(1, n):
        if phases[i] - phases[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    # Wraparound: last cluster may continue into the first.
    if len(groups) > 1 and (2.0 * math.pi - phases[-1]) + phases[0] <= tol:
        groups[0] = groups.pop() + groups[0]
    return tuple(tuple(g) for g in groups)


def decompose(P: Propagator, tau_deg: float | None = None) -> SpectralDecomposition:
    """Full eigendecomposition of the propagator.

    Uses the complex Schur form; for a unitary matrix the Schur factor is
    numerically diagonal and the Schur basis is orthonormal, which is what
    the degenerate clusters at special N require.  One retry under a random
    unitary conjugation before giving up.
    """
    N = P.N
    if tau_deg is None:
        tau_deg = 1e-8 * N

    def attempt(mat: np.ndarray, back: np.ndarray | None):
        T, Z = scipy.linalg.schur(mat, output="complex")
        lam = np.diagonal(T).copy()
        lam /= np.abs(lam)
        V = Z if back is None else back @ Z
        R = P.B @ V - V * lam[None, :]
        residual = float(np.max(np.linalg.norm(R, axis=0)))
        return lam, V, residual

    lam, V, residual = attempt(P.B, None)
    if residual > _RESIDUAL_TOL:
        rng = np.random.default_rng(7)
        Wr = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        Q, _ = np.linalg.qr(Wr)
        lam, V, residual = attempt(Q.conj().T @ P.B @ Q, Q)
        if residual > _RESIDUAL_TOL:
            raise ConvergenceFailure(f"eigen residual {residual:.3e} > {_RESIDUAL_TOL}")
    ortho = float(np.linalg.norm(V.conj().T @ V - np.eye(N), 2))
    if ortho > _ORTHO_TOL:
        raise ConvergenceFailure(f"eigenbasis orthonormality defect {ortho:.3e}")

    phases = np.mod(np.angle(lam), 2.0 * math.pi)
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    V = V[:, order]
    V.setflags(write=False)
    phases.setflags(write=False)
    return SpectralDecomposition(
        eigenphases=phases,
        eigenvectors=V,
        residual=residual,
        clusters=_cluster_phases(phases, tau_deg),
    )


def eigenbasis_elements(
    qt: QuantumTorus, dec: SpectralDecomposition, a: TorusSymbol
) -> np.ndarray:
    """Diagonal matrix elements <Op(a) u_j, u_j> over the eigenbasis."""
    Op = quantize(qt, a).matrix
    V = dec.eigenvectors
    return np.einsum("ij,ij->j", V.conj(), Op @ V)


def qe_variance(
    A: CatMatrix,
    a: TorusSymbol,
    Ns: list[int],
    symbol_id: str = "symbol",
    theta: tuple[float, float] | None = None,
) -> QEReport:
    """Quantum-ergodicity statistic V(N) over full eigenbases.

    V(N) = (1/N) sum_j |<Op(a) u_j, u_j> - mean(a)|^2.  Ergodicity of the
    classical map drives V(N) down along generic N; no rate is asserted.
    """
    rows = []
    for N in Ns:
        qt = QuantumTorus(N, theta=theta)
        dec = decompose(build_propagator(qt, A))
        d = eigenbasis_elements(qt, dec, a) - a.mean
        rows.append((N, float(np.mean(np.abs(d) ** 2)), float(np.max(np.abs(d)))))
    return QEReport(symbol_id=symbol_id, rows=tuple(rows))


def build_scarred_state(
    P: Propagator,
    orbit: PeriodicOrbit,
    branch: int | str = "auto",
    k_max: int = 64,
    sigma: float | None = None,
) -> tuple[np.ndarray, float]:
    """Time-averaged coherent state on a periodic orbit at special N.

    Requires B^k scalar for some k <= k_max.  The average
    v = sum_t e^{-i t alpha} B^t c_rho projects c_rho onto the alpha
    eigenspace, so v is an exact eigenvector up to roundoff.  Returns
    (unit vector, eigenphase alpha).  branch picks one of the k admissible
    phases; 'auto' takes the branch with the largest projection.
    """
    try:
        k, phase = quantum_period(P, k_max)
    except PeriodNotFound as exc:
        raise PeriodNotScalar(str(exc)) from exc
    rho = orbit.points[0].as_floats()
    c = coherent_state(P.qt, CoherentSpec(center=rho, sigma=sigma))
    iterates = np.empty((k, P.N), dtype=complex)
    iterates[0] = c
    for t in range(1, k):
        iterates[t] = P.B @ iterates[t - 1]

    base = math.atan2(phase.imag, phase.real)
    branches = range(k) if branch == "auto" else [int(branch)]
    best: tuple[float, np.ndarray, float] | None = None
    for m in branches:
        alpha = (base + 2.0 * math.pi * m) / k
        weights = np.exp(-1j * alpha * np.arange(k))
        v = weights @ iterates
        norm = float(np.linalg.norm(v))
        if best is None or norm > best[0]:
            best = (norm, v, alpha % (2.0 * math.pi))
    norm, v, alpha = best
    if norm < 1e-8:
        raise DegenerateProjection(
            f"projection onto branch {branch} vanished (norm {norm:.3e})"
        )
    return v / norm, alpha


def orbit_mass(
    qt: QuantumTorus,
    u: np.ndarray,
    orbit: PeriodicOrbit,
    r: float,
    grid: int = 128,
    sigma: float | None = None,
) -> float:
    """Husimi mass of u in the union of r-balls around the orbit points."""
    if not 0.0 < r < 0.25:
        raise ValueError("radius must lie in (0, 0.25)")
    field = husimi(qt, u, grid, grid, sigma=sigma)
    pts = np.array([p.as_floats() for p in orbit.points])
    return field.mass_in(ball_mask(grid, grid, pts, r))


def neighborhood_area(orbit: PeriodicOrbit, r: float, grid: int = 128) -> float:
    """Lebesgue area of the orbit neighborhood, under the same grid rule."""
    pts = np.array([p.as_floats() for p in orbit.points])
    return float(ball_mask(grid, grid, pts, r).mean())


@dataclass(frozen=True)
class MassScanRow:
    region: HoleRegion
    min_mass: float
    min_index: int


def min_mass_scan(
    P: Propagator,
    regions: list[HoleRegion],
    grid: int = 64,
    sigma: float | None = None,
) -> list[MassScanRow]:
    """Minimum Husimi mass over the eigenbasis, per region.

    Strictly positive minima across region families are the finite-N shadow
    of the full-support property of semiclassical measures.
    """
    qt = P.qt
    dec = decompose(P)
    sig = CoherentSpec((0.0, 0.0), sigma).resolved_sigma(qt)
    xs = np.arange(grid) / grid
    X, E = np.meshgrid(xs, xs, indexing="ij")
    pts = np.stack([X.ravel(), E.ravel()], axis=1)
    masses = np.empty((grid * grid, qt.N))
    for lo in range(0, len(pts), 4096):
        block = coherent_batch(qt, pts[lo : lo + 4096], sig)
        masses[lo : lo + 4096] = qt.N * np.abs(block.conj() @ dec.eigenvectors) ** 2
    masses /= masses.sum(axis=0)[None, :]  # normalize each eigenvector's field
    rows = []
    for region in regions:
        inside = region.contains(pts[:, 0], pts[:, 1])
        per_vec = masses[inside].sum(axis=0)
        j = int(np.argmin(per_vec))
        rows.append(MassScanRow(region=region, min_mass=float(per_vec[j]), min_index=j))
    return rows
