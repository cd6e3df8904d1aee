"""Dense complex Hermitian matrices and the spectral primitives built on them.

Everything downstream (instance assembly, certificates, solver shifts) goes
through this module for eigenvalue work, so the accuracy contract lives here:
extreme eigenpairs are computed densely up to ``DENSE_EIG_CUTOFF`` and with an
iterative Lanczos solver above that, and every returned eigenpair carries its
residual norm so callers never have to trust the backend blindly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

# Largest dimension routed to the dense eigendecomposition.
DENSE_EIG_CUTOFF = 2048

# Acceptance tolerance for treating an input matrix as Hermitian, relative to
# its largest entry.
HERMITIAN_ATOL = 1e-12


class EigensolverError(RuntimeError):
    """An eigensolver failed to converge or missed its accuracy target."""


@dataclass(frozen=True)
class HermitianMatrix:
    """Immutable dense Hermitian matrix with an exactly real diagonal.

    Construction averages the input with its conjugate transpose, forces the
    diagonal real, and marks the array read-only. Inputs whose asymmetry
    exceeds ``HERMITIAN_ATOL`` (relative to the largest entry magnitude) are
    rejected; route those through :func:`symmetrize` instead.
    """

    mat: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))))
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > HERMITIAN_ATOL * scale:
            raise ValueError(f"matrix is not Hermitian: asymmetry {asym:.3e}")
        h = (m + m.conj().T) / 2.0
        np.fill_diagonal(h, np.diag(h).real)
        h.setflags(write=False)
        object.__setattr__(self, "mat", h)

    @property
    def n(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class EigenResult:
    """Extreme eigenpairs of a Hermitian matrix.

    ``values`` are sorted ascending, ``vectors`` holds matching unit-norm
    columns, and ``residuals[j] = ||H v_j - values[j] v_j||_2``. Residuals are
    checked at construction time by :func:`extreme_eigs` against
    ``tol * n * max(1, ||H||_F)``; a solver that converged to something worse
    raises instead of returning.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray

    def __post_init__(self):
        for name in ("values", "vectors", "residuals"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def symmetrize(mat) -> HermitianMatrix:
    """Average a square complex matrix with its conjugate transpose."""
    m = np.asarray(mat, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError(f"expected a nonempty square matrix, got shape {m.shape}")
    return HermitianMatrix((m + m.conj().T) / 2.0)


def extreme_eigs(h: HermitianMatrix, k_small: int, k_large: int, tol: float = 1e-9) -> EigenResult:
    """Smallest ``k_small`` and largest ``k_large`` eigenpairs of ``h``.

    Dense path below ``DENSE_EIG_CUTOFF`` (and whenever the request covers
    a large fraction of the spectrum), shift-free Lanczos above it. Values
    come back ascending: the small block first, then the large block.

    Raises
    ------
    ValueError
        If the counts are negative, exceed ``n``, or ``tol <= 0``.
    EigensolverError
        If the backend fails to converge, or a residual exceeds
        ``tol * n * max(1, ||H||_F)``.
    """
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = h.n
    if k_small < 0 or k_large < 0:
        raise ValueError("eigenpair counts must be nonnegative")
    k = k_small + k_large
    if k > n:
        raise ValueError(f"requested {k} eigenpairs from a {n} x {n} matrix")
    if k == 0:
        empty_v = np.zeros((n, 0), dtype=np.complex128)
        return EigenResult(np.zeros(0), empty_v, np.zeros(0))

    if n <= DENSE_EIG_CUTOFF or k >= n // 2:
        try:
            vals, vecs = np.linalg.eigh(h.mat)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"dense eigendecomposition failed: {exc}") from exc
        idx = list(range(k_small)) + list(range(n - k_large, n))
        vals = vals[idx]
        vecs = vecs[:, idx]
    else:
        blocks = []
        try:
            if k_small:
                sv, sw = spla.eigsh(h.mat, k=k_small, which="SA", tol=tol)
                blocks.append((sv, sw))
            if k_large:
                lv, lw = spla.eigsh(h.mat, k=k_large, which="LA", tol=tol)
                blocks.append((lv, lw))
        except spla.ArpackNoConvergence as exc:
            raise EigensolverError(f"Lanczos iteration did not converge: {exc}") from exc
        vals = np.concatenate([b[0] for b in blocks])
        vecs = np.hstack([b[1] for b in blocks])
        order = np.argsort(vals)
        vals = vals[order]
        vecs = vecs[:, order]

    residuals = np.linalg.norm(h.mat @ vecs - vecs * vals[np.newaxis, :], axis=0)
    allowed = tol * n * max(1.0, float(np.linalg.norm(h.mat)))
    worst = float(residuals.max())
    if worst > allowed:
        raise EigensolverError(
            f"eigenpair residual {worst:.3e} exceeds the allowed {allowed:.3e}"
        )
    return EigenResult(vals, vecs, residuals)


def operator_norm(h: HermitianMatrix, tol: float = 1e-9) -> float:
    """Spectral norm, i.e. the largest eigenvalue magnitude."""
    if h.n == 1:
        return float(np.abs(h.mat[0, 0]))
    eig = extreme_eigs(h, 1, 1, tol=tol)
    return float(np.max(np.abs(eig.values)))


def quad_form(h: HermitianMatrix, vec) -> float:
    """Real quadratic form v* H v.

    The imaginary part of the raw complex product is pure rounding noise for
    a Hermitian H; a diagnostic assert keeps it below
    1e-10 * ||H||_F * max(1, ||v||^2).
    """
    v = np.asarray(vec, dtype=np.complex128)
    if v.shape != (h.n,):
        raise ValueError(f"vector shape {v.shape} does not match matrix size {h.n}")
    q = complex(np.vdot(v, h.mat @ v))
    norm_sq = float(np.vdot(v, v).real)
    assert abs(q.imag) <= 1e-10 * max(1.0, float(np.linalg.norm(h.mat))) * max(1.0, norm_sq), (
        f"quadratic form has non-negligible imaginary part {q.imag:.3e}"
    )
    return q.real
