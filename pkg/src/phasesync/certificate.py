"""Dual certificate for the unit-diagonal semidefinite relaxation.

At a first-order critical point ``x`` of the torus-constrained quadratic
objective, the Hermitian matrix ``S = Re diag(C x xbar) - C`` satisfies
``S x = 0`` and ``S + C`` diagonal by construction. If ``S`` is also positive
semidefinite, ``x x*`` solves the relaxation ``max tr(C X)`` over unit
diagonal PSD matrices, so the estimator is globally optimal (tight). If in
addition the second smallest eigenvalue is strictly positive, ``S`` has rank
``n - 1`` and ``x x*`` is the unique solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermitian import EigensolverError, HermitianMatrix, extreme_eigs
from .model import PhaseVector

RESIDUAL_TOL = 1e-9
PSD_TOL = -1e-14
RANK_TOL = 1e-8


@dataclass(frozen=True)
class CertificateReport:
    """Spectral verdict on a candidate optimum.

    ``tight`` means the certificate residual ``||S x||`` is below
    ``residual_tol * n`` and the smallest eigenvalue clears ``psd_tol * n``
    (a slightly negative floor that absorbs eigensolver rounding).
    ``unique`` additionally requires the second eigenvalue to clear
    ``rank_tol * n``, certifying rank ``n - 1``. ``diag_min`` is the smallest
    diagonal entry of ``S``, a cheap necessary sanity value: at any
    second-order critical point it should not be substantially negative.
    ``error`` carries an eigensolver failure note; both flags are false then.
    """

    residual: float
    min_eig: float
    second_eig: float
    diag_min: float
    tight: bool
    unique: bool
    error: str | None = None


def build_certificate(data: HermitianMatrix, point: PhaseVector) -> HermitianMatrix:
    """Assemble ``S = Re diag(C x xbar) - C`` without forming ``x x*``:
    off the diagonal ``S = -C``, and ``S_ii = Re((C x)_i xbar_i) - C_ii``."""
    if data.n != point.n:
        raise ValueError("matrix and point sizes disagree")
    x = point.vec
    w = data.mat @ x
    s = -data.mat
    np.fill_diagonal(s, (w * x.conj()).real - np.diag(data.mat).real)
    return HermitianMatrix(s)


def certify(
    data: HermitianMatrix,
    point: PhaseVector,
    residual_tol: float = RESIDUAL_TOL,
    psd_tol: float = PSD_TOL,
    rank_tol: float = RANK_TOL,
) -> CertificateReport:
    """Build the certificate at ``point`` and test tightness and uniqueness.

    Tolerances must carry their intended signs (``residual_tol > 0``,
    ``psd_tol < 0``, ``rank_tol > 0``); anything else is rejected rather than
    silently flipping a verdict. Eigensolver failure is reported in-band via
    ``error`` with both flags false.
    """
    if residual_tol <= 0.0:
        raise ValueError(f"residual_tol must be positive, got {residual_tol}")
    if psd_tol >= 0.0:
        raise ValueError(f"psd_tol must be negative, got {psd_tol}")
    if rank_tol <= 0.0:
        raise ValueError(f"rank_tol must be positive, got {rank_tol}")
    s = build_certificate(data, point)
    n = s.n
    residual = float(np.linalg.norm(s.mat @ point.vec))
    diag_min = float(np.min(np.diag(s.mat).real))
    try:
        eig = extreme_eigs(s, 2, 0)
    except EigensolverError as exc:
        return CertificateReport(
            residual=residual, min_eig=float("nan"), second_eig=float("nan"),
            diag_min=diag_min, tight=False, unique=False, error=str(exc),
        )
    min_eig = float(eig.values[0])
    second_eig = float(eig.values[1])
    tight = bool(residual <= residual_tol * n and min_eig >= psd_tol * n)
    unique = bool(tight and second_eig >= rank_tol * n)
    return CertificateReport(
        residual=residual, min_eig=min_eig, second_eig=second_eig,
        diag_min=diag_min, tight=tight, unique=unique,
    )
