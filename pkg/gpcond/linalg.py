"""
Dense symmetric linear algebra.

The default eigensolver is a cyclic Jacobi method. Each sweep visits every index pair
once in round-robin order; the n/2 pairs of one round are disjoint, so their rotations
commute and are applied together as vectorized row and column updates.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
import scipy.linalg

from .exceptions import (
    InvalidArgumentError,
    NotPsdError,
    NotSpdError,
    NumericalFailureError,
)
from .models import Eigensolver

LOGGER = logging.getLogger(__name__)

DEFAULT_PINV_TOL = 1e-10
JACOBI_MAX_SWEEPS = 30
JACOBI_REL_TOL = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """A = V diag(eigenvalues) V^T with ascending eigenvalues and orthonormal columns V."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1]) if self.size else 0.0

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0]) if self.size else 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


@dataclass(frozen=True)
class PinvFactor:
    """Moore-Penrose pseudoinverse S Lambda^+ S^T of a PSD matrix."""

    decomposition: SpectralDecomposition
    rank: int
    cutoff: float

    @property
    def inverse_eigenvalues(self) -> np.ndarray:
        lam = self.decomposition.eigenvalues
        inv = np.zeros_like(lam)
        keep = lam > self.cutoff
        inv[keep] = 1.0 / lam[keep]
        return inv

    def apply(self, v: np.ndarray) -> np.ndarray:
        """A^+ v for a vector or a matrix of column vectors."""
        vecs = self.decomposition.eigenvectors
        coeffs = vecs.T @ v
        inv = self.inverse_eigenvalues
        if coeffs.ndim == 1:
            return vecs @ (inv * coeffs)
        return vecs @ (inv[:, None] * coeffs)

    def whiten(self, v: np.ndarray) -> np.ndarray:
        """W with W^T W = v^T A^+ v, i.e. (Lambda^+)^{1/2} S^T v."""
        coeffs = self.decomposition.eigenvectors.T @ v
        root = np.sqrt(self.inverse_eigenvalues)
        if coeffs.ndim == 1:
            return root * coeffs
        return root[:, None] * coeffs

    def matrix(self) -> np.ndarray:
        vecs = self.decomposition.eigenvectors
        return _exact_symmetric((vecs * self.inverse_eigenvalues) @ vecs.T)


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower Cholesky factor L of A + sigma^2 I."""

    lower: np.ndarray
    sigma2: float

    def apply(self, v: np.ndarray) -> np.ndarray:
        """(A + sigma^2 I)^{-1} v."""
        return scipy.linalg.cho_solve((self.lower, True), v)

    def whiten(self, v: np.ndarray) -> np.ndarray:
        """L^{-1} v."""
        return scipy.linalg.solve_triangular(self.lower, v, lower=True)


PsdFactor = Union[PinvFactor, CholeskyFactor]


# =============================================================================
# Validation helpers
# =============================================================================


def as_sym(a) -> np.ndarray:
    """
    Validate a square finite matrix and return an exactly symmetric copy.

    Asymmetry up to round-off is averaged away; anything larger is rejected.
    """
    arr = np.array(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix has non-finite entries")
    if arr.size == 0:
        return arr
    scale = 1.0 + np.max(np.abs(arr))
    if np.max(np.abs(arr - arr.T)) > 1e-8 * scale:
        raise InvalidArgumentError("matrix is not symmetric")
    return _exact_symmetric(0.5 * (arr + arr.T))


def _exact_symmetric(a: np.ndarray) -> np.ndarray:
    return np.triu(a) + np.triu(a, 1).T


# =============================================================================
# Eigensolvers
# =============================================================================


def eigh_sym(a, method: Union[str, Eigensolver] = Eigensolver.JACOBI) -> SpectralDecomposition:
    """Spectral decomposition of a symmetric matrix, eigenvalues ascending."""
    arr = as_sym(a)
    method = Eigensolver(method)
    if method == Eigensolver.LAPACK:
        try:
            lam, vecs = np.linalg.eigh(arr)
        except np.linalg.LinAlgError as e:
            raise NumericalFailureError(f"eigh_sym: LAPACK eigh failed: {e}") from e
        return SpectralDecomposition(lam, vecs)
    lam, vecs = _jacobi(arr)
    order = np.argsort(lam, kind="stable")
    return SpectralDecomposition(lam[order], vecs[:, order])


def _round_robin(n: int):
    """Rounds of disjoint (p, q) pairs covering every pair of 0..n-1 once."""
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p), np.array(q)))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def _jacobi(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = a.shape[0]
    vecs = np.eye(n)
    if n < 2:
        return np.diag(a).copy(), vecs

    a = a.copy()
    norm = np.linalg.norm(a)
    threshold = JACOBI_REL_TOL * norm
    rounds = _round_robin(n)

    for sweep in range(JACOBI_MAX_SWEEPS + 1):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            LOGGER.debug("jacobi: n=%d converged after %d sweeps", n, sweep)
            return np.diag(a).copy(), vecs
        if sweep == JACOBI_MAX_SWEEPS:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            denom = np.where(active, 2.0 * apq, 1.0)
            # a tiny a_pq sends theta to inf, which gives t = 0
            with np.errstate(over="ignore"):
                theta = np.where(active, (a[q, q] - a[p, p]) / denom, 0.0)
                t = np.where(
                    active,
                    np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0)),
                    0.0,
                )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            rp = a[p, :]
            rq = a[q, :]
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            cp = a[:, p]
            cq = a[:, q]
            a[:, p] = c[None, :] * cp - s[None, :] * cq
            a[:, q] = s[None, :] * cp + c[None, :] * cq
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp = vecs[:, p]
            vq = vecs[:, q]
            vecs[:, p] = c[None, :] * vp - s[None, :] * vq
            vecs[:, q] = s[None, :] * vp + c[None, :] * vq

    raise NumericalFailureError(
        f"eigh_sym: Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (n={n})"
    )


# =============================================================================
# Factorizations
# =============================================================================


def pinv_psd(
    a,
    tau: float = DEFAULT_PINV_TOL,
    method: Union[str, Eigensolver] = Eigensolver.JACOBI,
) -> PinvFactor:
    """
    Pseudoinverse of a PSD matrix with relative cutoff tau * lambda_max.

    Eigenvalues above the cutoff are inverted, the rest map to zero (0^-1 := 0).
    """
    if not tau > 0:
        raise InvalidArgumentError(f"pinv tolerance must be > 0, got {tau}")
    dec = eigh_sym(a, method)
    cutoff = tau * max(dec.max_eigenvalue, 0.0)
    if dec.size and dec.min_eigenvalue < -cutoff:
        raise NotPsdError(
            f"pinv_psd: eigenvalue {dec.min_eigenvalue:.3e} below -{cutoff:.3e}",
            min_eigenvalue=dec.min_eigenvalue,
        )
    rank = int(np.count_nonzero(dec.eigenvalues > cutoff))
    if rank < dec.size:
        LOGGER.debug("pinv_psd: rank %d of %d (cutoff %.3e)", rank, dec.size, cutoff)
    return PinvFactor(decomposition=dec, rank=rank, cutoff=cutoff)


def cholesky_factor(a, sigma2: float) -> CholeskyFactor:
    """Cholesky factor of A + sigma^2 I."""
    if not sigma2 > 0:
        raise InvalidArgumentError(f"sigma2 must be > 0, got {sigma2}")
    arr = as_sym(a)
    shifted = arr + sigma2 * np.eye(arr.shape[0])
    try:
        lower, _ = scipy.linalg.cho_factor(shifted, lower=True)
    except np.linalg.LinAlgError as e:
        raise NotSpdError(f"solve_spd: Cholesky breakdown: {e}") from e
    return CholeskyFactor(lower=np.tril(lower), sigma2=float(sigma2))


def solve_spd(a, sigma2: float, b) -> np.ndarray:
    """(A + sigma^2 I)^{-1} b via Cholesky."""
    factor = cholesky_factor(a, sigma2)
    return factor.apply(np.asarray(b, dtype=float))


# =============================================================================
# Norms and projections
# =============================================================================


def trace_norm(a, method: Union[str, Eigensolver] = Eigensolver.JACOBI) -> float:
    """Nuclear norm: sum of absolute eigenvalues."""
    return float(np.sum(np.abs(eigh_sym(a, method).eigenvalues)))


def operator_norm(a, method: Union[str, Eigensolver] = Eigensolver.JACOBI) -> float:
    """Spectral norm: largest absolute eigenvalue."""
    lam = eigh_sym(a, method).eigenvalues
    return float(np.max(np.abs(lam))) if lam.size else 0.0


def psd_project(a, method: Union[str, Eigensolver] = Eigensolver.JACOBI) -> np.ndarray:
    """Nearest PSD matrix in operator norm: negative eigenvalues clamped to zero."""
    dec = eigh_sym(a, method)
    vecs = dec.eigenvectors
    return _exact_symmetric((vecs * np.maximum(dec.eigenvalues, 0.0)) @ vecs.T)


def psd_sqrt(
    a,
    method: Union[str, Eigensolver] = Eigensolver.JACOBI,
    floor: float = 0.0,
) -> np.ndarray:
    """
    Factor L = V Lambda_+^{1/2} with L L^T = psd_project(A).

    Eigenvalues at or below `floor` are treated as zero, so round-off in a singular
    covariance does not leak into the root as sqrt(round-off).
    """
    if floor < 0:
        raise InvalidArgumentError(f"floor must be >= 0, got {floor}")
    dec = eigh_sym(a, method)
    if dec.size and dec.min_eigenvalue < 0.0:
        LOGGER.debug("psd_sqrt: clamping eigenvalues down to %.3e", dec.min_eigenvalue)
    lam = np.where(dec.eigenvalues > floor, dec.eigenvalues, 0.0)
    return dec.eigenvectors * np.sqrt(lam)


def psd_truncate(
    a,
    floor: float,
    method: Union[str, Eigensolver] = Eigensolver.JACOBI,
) -> np.ndarray:
    """A with every eigenvalue of magnitude at most `floor` set to zero, exactly symmetric."""
    if floor < 0:
        raise InvalidArgumentError(f"floor must be >= 0, got {floor}")
    dec = eigh_sym(a, method)
    lam = np.where(np.abs(dec.eigenvalues) > floor, dec.eigenvalues, 0.0)
    vecs = dec.eigenvectors
    return _exact_symmetric((vecs * lam) @ vecs.T)


def gram_difference_eigenvalues(
    plus: np.ndarray,
    minus: np.ndarray,
    method: Union[str, Eigensolver] = Eigensolver.JACOBI,
) -> np.ndarray:
    """
    Eigenvalues of P^T P - M^T M for P (r1, m) and M (r2, m).

    With U = [P; M] = (Q R)^T from a thin QR of U^T, the difference is
    Q (R J R^T) Q^T with J = diag(+1 x r1, -1 x r2), so only a (r1 + r2)-square
    eigenproblem is solved when r1 + r2 < m; the other m - r1 - r2 eigenvalues are
    zero and are left out.
    """
    plus = np.asarray(plus, dtype=float)
    minus = np.asarray(minus, dtype=float)
    if plus.ndim != 2 or minus.ndim != 2 or plus.shape[1] != minus.shape[1]:
        raise InvalidArgumentError(
            f"factors need the same column count, got {plus.shape} and {minus.shape}"
        )
    stacked = np.vstack([plus, minus])
    k, m = stacked.shape
    if k >= m:
        return eigh_sym(plus.T @ plus - minus.T @ minus, method).eigenvalues
    _, r = np.linalg.qr(stacked.T, mode="reduced")
    signs = np.concatenate([np.ones(plus.shape[0]), -np.ones(minus.shape[0])])
    core = (r * signs) @ r.T
    return eigh_sym(_exact_symmetric(0.5 * (core + core.T)), method).eigenvalues
