"""Weyl quantization of torus observables into N x N matrices.

States live on the position grid x_j = (j + theta_2)/N.  The two elementary
unitaries are the modulation M = diag(e^{2 pi i x_j}) and the cyclic shift S
that translates position by +1/N (picking up the twist phase e^{-2 pi i
theta_1} on wraparound).  The phase-space translation attached to a Fourier
mode k = (k1, k2) is the symmetrically ordered product

    T_N(k) = e^{-i pi k1 k2 / N} M^{k1} S^{k2},

which satisfies, exactly,

    T_N(k)^* = T_N(-k),
    T_N(k) T_N(l) = e^{i pi (k1 l2 - k2 l1)/N} T_N(k + l)   (theta = 0).

Quantization is Op_N(a) = sum_k a_hat(k) T_N(k), so real symbols give exactly
Hermitian matrices and symbols depending on x alone give diagonal
multiplication operators.  All symbols are finite trigonometric polynomials;
the Fourier bookkeeping (products, Poisson brackets, composition with a cat
matrix) is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

from .arithmetic import CatMatrix
from .errors import NotNormalized

Mode = tuple[int, int]

_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class QuantumTorus:
    """Quantization arena: dimension N, twist theta, h = 1/(2 pi N).

    The default twist (0, 0) is only admitted for even N; odd N requires the
    caller to pass theta explicitly (the propagator construction then
    certifies or rejects the pair).
    """

    N: int
    theta: tuple[float, float] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.theta is None:
            if self.N % 2 != 0:
                raise ValueError(
                    "default theta=(0,0) requires even N; pass theta explicitly"
                )
            object.__setattr__(self, "theta", (0.0, 0.0))
        else:
            t1, t2 = self.theta
            if not (0.0 <= t1 < 1.0 and 0.0 <= t2 < 1.0):
                raise ValueError("theta components must lie in [0, 1)")
            object.__setattr__(self, "theta", (float(t1), float(t2)))

    @property
    def h(self) -> float:
        """Semiclassical parameter, defined by 2 pi N h = 1."""
        return 1.0 / (2.0 * math.pi * self.N)

    def positions(self) -> np.ndarray:
        return (np.arange(self.N) + self.theta[1]) / self.N


class TorusSymbol:
    """Finite Fourier series a(x, xi) = sum_k a_hat(k) e^{2 pi i (k1 x + k2 xi)}.

    declared_real marks symbols with a_hat(-k) = conj(a_hat(k)); those
    quantize to exactly Hermitian matrices.
    """

    __slots__ = ("coeffs", "declared_real")

    def __init__(self, coeffs: Mapping[Mode, complex], declared_real: bool | None = None):
        cleaned: dict[Mode, complex] = {}
        for k, v in coeffs.items():
            k = (int(k[0]), int(k[1]))
            v = complex(v)
            if v != 0:
                cleaned[k] = cleaned.get(k, 0.0) + v
        self.coeffs: dict[Mode, complex] = cleaned
        if declared_real is None:
            declared_real = all(
                abs(cleaned.get((-k[0], -k[1]), 0.0) - v.conjugate()) <= 1e-15
                for k, v in cleaned.items()
            )
        if declared_real:
            for k, v in cleaned.items():
                w = cleaned.get((-k[0], -k[1]), 0.0)
                if abs(w - v.conjugate()) > 1e-12:
                    raise ValueError(f"declared_real but a_hat{-k[0], -k[1]} != conj at {k}")
        self.declared_real = bool(declared_real)

    # --- constructors -------------------------------------------------
    @classmethod
    def constant(cls, value: complex = 1.0) -> "TorusSymbol":
        return cls({(0, 0): value})

    @classmethod
    def exponential(cls, k: Mode, amplitude: complex = 1.0) -> "TorusSymbol":
        return cls({tuple(k): amplitude})

    @classmethod
    def cos_x(cls) -> "TorusSymbol":
        return cls({(1, 0): 0.5, (-1, 0): 0.5}, declared_real=True)

    @classmethod
    def cos_xi(cls) -> "TorusSymbol":
        return cls({(0, 1): 0.5, (0, -1): 0.5}, declared_real=True)

    @classmethod
    def random_real(cls, rng: np.random.Generator, degree: int) -> "TorusSymbol":
        """Random real trigonometric polynomial of sup-norm degree <= degree."""
        coeffs: dict[Mode, complex] = {}
        for k1 in range(-degree, degree + 1):
            for k2 in range(-degree, degree + 1):
                if (k1, k2) <= (0, 0):
                    continue
                c = complex(rng.standard_normal(), rng.standard_normal())
                coeffs[(k1, k2)] = c
                coeffs[(-k1, -k2)] = c.conjugate()
        coeffs[(0, 0)] = complex(rng.standard_normal())
        return cls(coeffs, declared_real=True)

    @classmethod
    def gaussian_bump(
        cls, center: tuple[float, float], width: float, degree: int
    ) -> "TorusSymbol":
        """Periodized Gaussian bump at `center`, truncated to modes <= degree.

        Real and nonnegative up to truncation; used as a test observable
        localized near a phase-space point.
        """
        x0, e0 = center
        coeffs: dict[Mode, complex] = {}
        for k1 in range(-degree, degree + 1):
            for k2 in range(-degree, degree + 1):
                # Fourier transform of the periodized Gaussian.
                amp = math.exp(-2.0 * math.pi**2 * width**2 * (k1 * k1 + k2 * k2))
                phase = -2.0 * math.pi * (k1 * x0 + k2 * e0)
                coeffs[(k1, k2)] = amp * complex(math.cos(phase), math.sin(phase))
        return cls(coeffs, declared_real=True)

    # --- algebra --------------------------------------------------------
    def __iter__(self) -> Iterator[tuple[Mode, complex]]:
        return iter(sorted(self.coeffs.items()))

    def __add__(self, other: "TorusSymbol") -> "TorusSymbol":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return TorusSymbol(out, declared_real=self.declared_real and other.declared_real)

    def scaled(self, c: complex) -> "TorusSymbol":
        real = self.declared_real and abs(complex(c).imag) == 0.0
        return TorusSymbol({k: c * v for k, v in self.coeffs.items()}, declared_real=real)

    def __mul__(self, other: "TorusSymbol") -> "TorusSymbol":
        """Pointwise product, computed by exact Fourier convolution."""
        out: dict[Mode, complex] = {}
        for k, a in self.coeffs.items():
            for l, b in other.coeffs.items():
                m = (k[0] + l[0], k[1] + l[1])
                out[m] = out.get(m, 0.0) + a * b
        return TorusSymbol(out, declared_real=self.declared_real and other.declared_real)

    def conjugate(self) -> "TorusSymbol":
        return TorusSymbol(
            {(-k[0], -k[1]): v.conjugate() for k, v in self.coeffs.items()},
            declared_real=self.declared_real,
        )

    def compose_cat(self, A: CatMatrix) -> "TorusSymbol":
        """a o A; the mode e_k pulls back to e_{A^T k} (exact lattice map)."""
        return TorusSymbol(
            {
                (A.a * k[0] + A.c * k[1], A.b * k[0] + A.d * k[1]): v
                for k, v in self.coeffs.items()
            },
            declared_real=self.declared_real,
        )

    @property
    def mean(self) -> complex:
        """Integral over the torus, i.e. the (0,0) Fourier coefficient."""
        return self.coeffs.get((0, 0), 0.0 + 0.0j)

    @property
    def coefficient_l1(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def evaluate(self, x, xi):
        """Pointwise values; vectorized over numpy inputs."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        total = np.zeros(np.broadcast(x, xi).shape, dtype=complex)
        for (k1, k2), v in self.coeffs.items():
            total += v * np.exp(2j * np.pi * (k1 * x + k2 * xi))
        return total


def poisson_bracket(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """Poisson bracket on Fourier modes.

    With the orientation fixed by the translation phase convention above,
    {e_k, e_l} = -4 pi^2 (k1 l2 - k2 l1) e_{k+l}; this is the sign for which
    [Op(a), Op(b)] = -i h Op({a, b}) + O(h^2) holds.
    """
    out: dict[Mode, complex] = {}
    for k, av in a.coeffs.items():
        for l, bv in b.coeffs.items():
            s = k[0] * l[1] - k[1] * l[0]
            if s == 0:
                continue
            m = (k[0] + l[0], k[1] + l[1])
            out[m] = out.get(m, 0.0) + (-4.0 * math.pi**2 * s) * av * bv
    return TorusSymbol(out, declared_real=a.declared_real and b.declared_real)


@dataclass(frozen=True)
class ObservableMatrix:
    """Dense N x N quantization with its Hermitian certificate."""

    matrix: np.ndarray
    hermitian: bool

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            defect = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
            if defect > _HERMITIAN_TOL:
                raise ValueError(f"hermitian flag set but defect {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def weyl_translation(qt: QuantumTorus, k: Mode) -> np.ndarray:
    """The unitary T_N(k): one nonzero entry per row.

    Row i holds e^{-i pi k1 k2 / N} e^{2 pi i k1 (i + theta_2)/N} times the
    twist winding phase, in column (i - k2) mod N.
    """
    N = qt.N
    k1, k2 = int(k[0]), int(k[1])
    t1, t2 = qt.theta
    i = np.arange(N)
    src = i - k2
    col = src % N
    winding = (src - col) // N  # floor(src / N)
    phase = (
        -math.pi * k1 * k2 / N
        + 2.0 * math.pi * k1 * (i + t2) / N
        + 2.0 * math.pi * t1 * winding
    )
    T = np.zeros((N, N), dtype=complex)
    T[i, col] = np.exp(1j * phase)
    return T


def quantize(qt: QuantumTorus, a: TorusSymbol) -> ObservableMatrix:
    """Op_N(a) = sum_k a_hat(k) T_N(k).

    The Hermitian flag is inherited from declared_real; it is exact because
    T_N(k)^* = T_N(-k) holds with zero tolerance.
    """
    N = qt.N
    out = np.zeros((N, N), dtype=complex)
    t1, t2 = qt.theta
    i = np.arange(N)
    for (k1, k2), v in a.coeffs.items():
        src = i - k2
        col = src % N
        winding = (src - col) // N
        phase = (
            -math.pi * k1 * k2 / N
            + 2.0 * math.pi * k1 * (i + t2) / N
            + 2.0 * math.pi * t1 * winding
        )
        out[i, col] += v * np.exp(1j * phase)
    return ObservableMatrix(out, hermitian=a.declared_real)


def operator_norm(M: np.ndarray, power_tol: float = 1e-10) -> float:
    """Largest singular value; dense SVD below 2048, power iteration above."""
    n = M.shape[0]
    if n <= 2048:
        return float(np.linalg.norm(M, 2))
    # Power iteration on M^* M, tolerance only needs 2-3 digits for slope fits.
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(500):
        w = M.conj().T @ (M @ v)
        s = math.sqrt(float(np.linalg.norm(w)))
        if abs(s - prev) <= power_tol * max(s, 1.0):
            return s
        prev = s
        v = w / np.linalg.norm(w)
    return prev  # pragma: no cover


def product_defect(qt: QuantumTorus, a: TorusSymbol, b: TorusSymbol) -> float:
    """|| Op(a) Op(b) - Op(ab) ||, the O(h) product-rule defect."""
    Oa = quantize(qt, a).matrix
    Ob = quantize(qt, b).matrix
    Oab = quantize(qt, a * b).matrix
    return operator_norm(Oa @ Ob - Oab)


def commutator_defect(qt: QuantumTorus, a: TorusSymbol, b: TorusSymbol) -> float:
    """|| [Op(a), Op(b)] + i h Op({a, b}) ||, the commutator-rule defect."""
    Oa = quantize(qt, a).matrix
    Ob = quantize(qt, b).matrix
    Opb = quantize(qt, poisson_bracket(a, b)).matrix
    return operator_norm(Oa @ Ob - Ob @ Oa + 1j * qt.h * Opb)


def matrix_element(M: ObservableMatrix | np.ndarray, u: np.ndarray) -> complex:
    """<M u, u> for a unit vector u (tolerance 1e-12 on the norm)."""
    mat = M.matrix if isinstance(M, ObservableMatrix) else np.asarray(M)
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise NotNormalized(f"|u| = {np.linalg.norm(u)!r}")
    return complex(np.vdot(u, mat @ u))


def measure_moments(
    qt: QuantumTorus, u: np.ndarray, symbols: Sequence[TorusSymbol]
) -> list[complex]:
    """Moments <Op(a) u, u> of the empirical semiclassical measure of u."""
    u = np.asarray(u, dtype=complex)
    if abs(np.linalg.norm(u) - 1.0) > 1e-12:
        raise NotNormalized(f"|u| = {np.linalg.norm(u)!r}")
    return [complex(np.vdot(u, quantize(qt, a).matrix @ u)) for a in symbols]
