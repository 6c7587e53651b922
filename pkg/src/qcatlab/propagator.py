"""Unitary quantization B_N of a hyperbolic cat matrix, with exact Egorov.

Construction route: decompose A into a word in the SL(2, Z) generators

    R = [[0, -1], [1, 0]]   and   U_n = [[1, n], [0, 1]]

by the Euclidean algorithm on the first column.  Each generator has an exact
quantization: R maps to the unitary DFT G[m, j] = e^{-2 pi i m j / N}/sqrt(N)
and the lower shear [[1, 0], [c, 1]] to the quadratic-phase diagonal
diag(e^{-i pi c j^2 / N}); upper shears are G^{-1} diag(e^{i pi n j^2 / N}) G.
Each factor Q_g satisfies Q_g^{-1} T_N(k) Q_g = T_N(g^T k) identically for
even N at theta = 0, so the product satisfies the exact Egorov identity for
the word.  Construction always ends with a certification pass (unitarity plus
Egorov on the generating modes); pairs that fail are rejected.

For odd N or nonzero twist the generator diagonals lose periodicity, so the
builder falls back to solving the intertwining equations directly: B is the
null vector of the sparse linear system T(k) B = B T(A^T k), k in
{(1,0), (0,1)}, which pins B up to a scalar exactly when the pair is
admissible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .arithmetic import CatMatrix
from .errors import InadmissiblePair, PeriodNotFound
from .quantization import (
    ObservableMatrix,
    QuantumTorus,
    TorusSymbol,
    operator_norm,
    quantize,
    weyl_translation,
)

_UNITARITY_TOL = 1e-11
_EGOROV_CERT_TOL = 1e-10
_NULLSPACE_MAX_N = 300


def sl2_word(A: CatMatrix) -> list[tuple[str, int]]:
    """A as a product of generators, left to right.

    Entries are ("R", 1) for the rotation or ("U", n) for [[1, n], [0, 1]].
    The product of the word equals A exactly (asserted in integer arithmetic).
    """
    a, b, c, d = A.a, A.b, A.c, A.d
    word: list[tuple[str, int]] = []
    # Reduce A to an upper-triangular matrix by left-multiplying with
    # R^{-1} U_{-q}; the recorded factors then rebuild A in order.
    while c != 0:
        q = a // c
        word.append(("U", q))
        word.append(("R", 1))
        # R^{-1} U_{-q} [[a,b],[c,d]] = [[c, d], [qc - a, qd - b]]
        a, b, c, d = c, d, q * c - a, q * d - b
    if a == 1:
        if b != 0:
            word.append(("U", b))
    else:
        # a = d = -1: finish with R^2 U_{-b} = -U_{-b}.
        word.append(("R", 1))
        word.append(("R", 1))
        if b != 0:
            word.append(("U", -b))

    # Exact reconstruction check.
    m = (1, 0, 0, 1)
    for kind, n in word:
        g = (0, -1, 1, 0) if kind == "R" else (1, n, 0, 1)
        m = (
            m[0] * g[0] + m[1] * g[2],
            m[0] * g[1] + m[1] * g[3],
            m[2] * g[0] + m[3] * g[2],
            m[2] * g[1] + m[3] * g[3],
        )
    assert m == (A.a, A.b, A.c, A.d), "generator word does not rebuild A"
    return word


def _dft(N: int) -> np.ndarray:
    j = np.arange(N)
    return np.exp(-2j * np.pi * np.outer(j, j) / N) / math.sqrt(N)


def _shear_diag(N: int, n: int) -> np.ndarray:
    """diag(e^{i pi n j^2 / N}), the quantum shear generator."""
    j = np.arange(N)
    return np.exp(1j * np.pi * n * j * j / N)


def _word_matrix(N: int, word: list[tuple[str, int]]) -> np.ndarray:
    G = _dft(N)
    Gh = G.conj().T
    B = np.eye(N, dtype=complex)
    for kind, n in word:
        if kind == "R":
            B = B @ G
        else:
            # Q_{U_n} = G^{-1} diag(e^{i pi n j^2/N}) G
            B = (B @ Gh) * _shear_diag(N, n)[np.newaxis, :] @ G
    return B


def _nullspace_candidate(qt: QuantumTorus, A: CatMatrix) -> np.ndarray:
    """Solve T(k) B = B T(A^T k) for the generating k directly.

    Returns the (Frobenius-normalized) null vector reshaped to N x N; the
    caller rescales and certifies.  Raises InadmissiblePair when the system
    has no null space at working precision.
    """
    N = qt.N
    if N > _NULLSPACE_MAX_N:
        raise InadmissiblePair(
            f"no generator construction for N={N}, theta={qt.theta}, and the "
            f"direct intertwining solve is capped at N={_NULLSPACE_MAX_N}"
        )
    eye = sp.identity(N, format="csr", dtype=complex)
    blocks = []
    for k in ((1, 0), (0, 1)):
        Tk = sp.csr_matrix(weyl_translation(qt, k))
        kA = (A.a * k[0] + A.c * k[1], A.b * k[0] + A.d * k[1])
        TkA = sp.csr_matrix(weyl_translation(qt, kA))
        blocks.append(sp.kron(eye, Tk, format="csr") - sp.kron(TkA.T, eye, format="csr"))
    L = sp.vstack(blocks, format="csr")
    LhL = (L.getH() @ L).tocsc()
    try:
        vals, vecs = spla.eigsh(LhL, k=1, sigma=-1e-9, which="LM")
    except Exception as exc:  # solver breakdown counts as failed certification
        raise InadmissiblePair(f"intertwining solve failed: {exc}") from exc
    if vals[0] > 1e-10:
        raise InadmissiblePair(
            f"no intertwiner exists for N={N}, theta={qt.theta} "
            f"(smallest residual eigenvalue {vals[0]:.3e})"
        )
    x = vecs[:, 0]
    return x.reshape((N, N), order="F")


def _fix_global_phase(B: np.ndarray) -> np.ndarray:
    """Make the first entry of maximal modulus positive real (row-major scan)."""
    flat = np.abs(B).ravel()
    top = flat.max()
    idx = int(np.nonzero(flat >= top * (1.0 - 1e-9))[0][0])
    pivot = B.ravel()[idx]
    return B * (abs(pivot) / pivot)


@dataclass(frozen=True)
class Propagator:
    """Certified quantum cat map: unitary B with B^* Op(a) B = Op(a o A)."""

    qt: QuantumTorus
    A: CatMatrix
    B: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.B, dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "B", b)

    @property
    def N(self) -> int:
        return self.qt.N


def egorov_defect(P: Propagator, a: TorusSymbol) -> float:
    """|| B^{-1} Op(a) B - Op(a o A) ||; zero in exact arithmetic."""
    Oa = quantize(P.qt, a).matrix
    OaA = quantize(P.qt, a.compose_cat(P.A)).matrix
    return operator_norm(P.B.conj().T @ Oa @ P.B - OaA)


def build_propagator(qt: QuantumTorus, A: CatMatrix) -> Propagator:
    """Construct and certify B_N for the pair (qt, A).

    The global phase is fixed deterministically (first maximal-modulus entry
    made positive real), so repeated builds are bit-identical.
    """
    N = qt.N
    if qt.theta == (0.0, 0.0) and N % 2 == 0:
        B = _word_matrix(N, sl2_word(A))
    else:
        B = _nullspace_candidate(qt, A)
        scale = np.linalg.norm(B, "fro") / math.sqrt(N)
        B = B / scale
    B = _fix_global_phase(B)

    unit_defect = operator_norm(B.conj().T @ B - np.eye(N))
    if unit_defect > _UNITARITY_TOL:
        raise InadmissiblePair(
            f"unitarity certification failed for N={N}, theta={qt.theta}: "
            f"defect {unit_defect:.3e}"
        )
    P = Propagator(qt=qt, A=A, B=B)
    for k in ((1, 0), (0, 1)):
        defect = egorov_defect(P, TorusSymbol.exponential(k))
        if defect > _EGOROV_CERT_TOL:
            raise InadmissiblePair(
                f"Egorov certification failed for N={N}, theta={qt.theta} "
                f"at mode {k}: defect {defect:.3e}"
            )
    return P


def evolve(P: Propagator, u: np.ndarray, t: int) -> np.ndarray:
    """B^t u; negative t applies the conjugate transpose."""
    v = np.asarray(u, dtype=complex).copy()
    step = P.B if t >= 0 else P.B.conj().T
    for _ in range(abs(int(t))):
        v = step @ v
    return v


def quantum_period(P: Propagator, k_max: int) -> tuple[int, complex]:
    """Least k <= k_max with B^k a scalar phase, to tolerance 1e-8.

    Returns (k, phase).  The Frobenius norm bounds the operator norm, so the
    check || B^k - phase I ||_F <= 1e-8 is conservative.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    N = P.N
    C = np.eye(N, dtype=complex)
    for k in range(1, k_max + 1):
        C = P.B @ C
        diag = np.diagonal(C)
        pivot = diag[np.argmax(np.abs(diag))]
        if abs(pivot) < 0.5:
            continue
        phase = pivot / abs(pivot)
        if np.linalg.norm(C - phase * np.eye(N), "fro") <= 1e-8:
            return k, complex(phase)
    raise PeriodNotFound(f"no scalar power of B up to k_max={k_max}")
