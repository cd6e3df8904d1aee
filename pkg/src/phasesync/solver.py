"""Second-order ascent for the torus-constrained quadratic objective.

The driver maximizes ``x* C x`` over unit-modulus vectors by combining three
monotone pieces:

* projected power iterations on the shifted matrix ``C + lam I``, with
  ``lam = max(0, -min_eig(C))`` so the shift is positive semidefinite; each
  iteration maps ``x`` to the entrywise phase of ``(C + lam I) x`` and never
  decreases the objective (majorize-minimize argument);
* a one-time restart from the planted signal, when one is supplied and the
  first stationary point found scores below it; converged runs therefore
  always report a cost at least that of the plant;
* saddle escapes: at an approximate critical point, a negative eigenvalue of
  the certificate matrix ``S`` exposes a tangent direction of negative
  curvature, and a backtracking step along it strictly increases the cost.
  Escapes are counted and capped.

First-order convergence is declared when the Riemannian gradient norm falls
below ``grad_tol * n``. Second-order quality of the final point is then a
matter for the certificate, which the escape machinery has already consulted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .certificate import build_certificate
from .hermitian import HermitianMatrix, extreme_eigs
from .manifold import PhaseVector, TangentVector, hessian_vec, project_tangent, real_inner, retract

logger = logging.getLogger(__name__)

# Entry moduli below this are left at their previous phase during a power
# step; the phase of a zero is undefined.
PHASE_FLOOR = 1e-14


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`solve_second_order`.

    ``grad_tol`` and ``escape_tol`` scale with n before use (thresholds are
    ``grad_tol * n`` on the gradient norm and ``-escape_tol * n`` on the
    certificate eigenvalue). ``fd_check`` enables a finite-difference audit
    of the gradient at the starting point, for debugging new matrix types.
    """

    grad_tol: float = 1e-10
    max_iters: int = 500
    escape_tol: float = 1e-10
    max_escapes: int = 5
    fd_check: bool = False

    def __post_init__(self):
        if self.grad_tol <= 0.0:
            raise ValueError(f"grad_tol must be positive, got {self.grad_tol}")
        if self.escape_tol <= 0.0:
            raise ValueError(f"escape_tol must be positive, got {self.escape_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.max_escapes < 0:
            raise ValueError(f"max_escapes must be nonnegative, got {self.max_escapes}")


@dataclass(frozen=True)
class SolverReport:
    """Outcome of a solve.

    ``iterations`` counts power steps; escapes and the optional restart are
    tracked separately. ``beat_planted`` is None when no planted signal was
    supplied, otherwise it records ``cost >= planted cost - 1e-12 n^2``.
    ``converged`` implies ``grad_norm <= grad_tol * n``.
    """

    x: PhaseVector
    cost: float
    grad_norm: float
    iterations: int
    escapes: int
    beat_planted: bool | None
    converged: bool


def _grad_dir(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Gradient of g(x) = -x* C x given w = C x: the tangent part of -2w.
    return 2.0 * (w * x.conj()).real * x - 2.0 * w


def spectral_init(data: HermitianMatrix) -> PhaseVector:
    """Entrywise phases of the leading eigenvector.

    Entries of the eigenvector with modulus below 1e-12 are replaced by 1,
    since they carry no usable phase information.
    """
    eig = extreme_eigs(data, 0, 1)
    v = eig.vectors[:, 0]
    a = np.abs(v)
    tiny = a < 1e-12
    out = np.where(tiny, 1.0 + 0.0j, v / np.where(tiny, 1.0, a))
    return PhaseVector(out)


def escape_direction(
    data: HermitianMatrix,
    point: PhaseVector,
    tol: float,
    grad_tol: float = 1e-10,
) -> TangentVector | None:
    """Unit tangent direction of negative curvature at a critical point.

    Requires an approximately first-order critical ``point`` (gradient norm
    at most ``10 * grad_tol * n``); the certificate spectrum only encodes the
    Hessian there. Returns None when the smallest certificate eigenvalue
    clears ``-tol * n``, or when neither candidate direction derived from its
    eigenvector has negative Rayleigh curvature.
    """
    if data.n != point.n:
        raise ValueError("matrix and point sizes disagree")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = data.n
    w = data.mat @ point.vec
    gn = float(np.linalg.norm(_grad_dir(w, point.vec)))
    if gn > 10.0 * grad_tol * n:
        raise ValueError(
            f"escape_direction needs an approximately critical point: "
            f"gradient norm {gn:.3e} exceeds {10.0 * grad_tol * n:.3e}"
        )
    s = build_certificate(data, point)
    eig = extreme_eigs(s, 1, 0)
    if float(eig.values[0]) >= -tol * n:
        return None
    u = eig.vectors[:, 0]
    # The eigenvector itself need not be tangent; both its projection and the
    # projection of its quarter-turn rotation are tried, and the more
    # negative curvature wins. One of them inherits curvature below
    # min_eig(S) whenever that eigenvalue is negative.
    best: TangentVector | None = None
    best_curv = 0.0
    for cand in (u, 1j * u):
        d = project_tangent(point, cand).dir
        dn = float(np.linalg.norm(d))
        if dn <= 1e-12:
            continue
        unit = TangentVector(point, d / dn)
        curv = real_inner(unit.dir, hessian_vec(data, point, unit).dir)
        if curv < best_curv:
            best = unit
            best_curv = curv
    return best


def _escape_step(data: HermitianMatrix, point: PhaseVector, direction: TangentVector,
                 cost0: float) -> np.ndarray | None:
    # Backtracking line search along a negative-curvature direction. Strict
    # increase is guaranteed for small steps; give up after 60 halvings.
    step = 1.0
    for _ in range(60):
        cand = retract(point, direction, step)
        cost = float(np.vdot(cand.vec, data.mat @ cand.vec).real)
        if cost > cost0:
            return np.asarray(cand.vec)
        step /= 2.0
    return None


def _fd_gradient_audit(data: HermitianMatrix, point: PhaseVector) -> None:
    # Compare <grad, v> against central differences of g(retract(x, t v))
    # along three deterministic tangent directions.
    n = point.n
    g = 2.0 * (np.diag(((data.mat @ point.vec) * point.vec.conj()).real) - data.mat) @ point.vec
    t = 1e-6
    for k in range(1, 4):
        raw = np.cos(k * np.arange(n)) + 1j * np.sin(2.0 * k * np.arange(n) + 0.5)
        v = project_tangent(point, raw)
        if v.norm() < 1e-12:
            continue
        ip = real_inner(g, v.dir)
        gp = retract(point, v, t).vec
        gm = retract(point, v, -t).vec
        fp = -float(np.vdot(gp, data.mat @ gp).real)
        fm = -float(np.vdot(gm, data.mat @ gm).real)
        fd = (fp - fm) / (2.0 * t)
        denom = max(1.0, abs(ip))
        if abs(fd - ip) / denom > 1e-4:
            raise RuntimeError(
                f"gradient audit failed: analytic {ip:.6e}, finite difference {fd:.6e}"
            )


def solve_second_order(
    data: HermitianMatrix,
    x0: PhaseVector,
    signal: PhaseVector | None = None,
    opts: SolverOptions | None = None,
) -> SolverReport:
    """Run the full ascent from ``x0``; see the module docstring for the
    three monotone pieces. Non-convergence within ``max_iters`` power steps
    is reported, not raised."""
    if opts is None:
        opts = SolverOptions()
    if data.n != x0.n:
        raise ValueError("matrix and starting point sizes disagree")
    if signal is not None and signal.n != data.n:
        raise ValueError("matrix and signal sizes disagree")
    if opts.fd_check:
        _fd_gradient_audit(data, x0)

    n = data.n
    cmat = data.mat
    tol = opts.grad_tol * n
    shift = max(0.0, -float(extreme_eigs(data, 1, 0).values[0]))

    cost_z = None
    if signal is not None:
        cost_z = float(np.vdot(signal.vec, cmat @ signal.vec).real)

    x = x0.vec.copy()
    iterations = 0
    escapes = 0
    restarted = False
    converged = False

    while True:
        w = cmat @ x
        gn = float(np.linalg.norm(_grad_dir(w, x)))
        if gn <= tol:
            cost_x = float(np.vdot(x, w).real)
            if signal is not None and not restarted and cost_x < cost_z:
                x = signal.vec.copy()
                restarted = True
                continue
            if escapes < opts.max_escapes:
                point = PhaseVector(x)
                direction = escape_direction(data, point, opts.escape_tol,
                                             grad_tol=opts.grad_tol)
                if direction is not None:
                    moved = _escape_step(data, point, direction, cost_x)
                    if moved is not None:
                        x = moved
                        escapes += 1
                        continue
                    logger.warning("negative curvature found but no ascent step succeeded")
            converged = True
            break
        if iterations >= opts.max_iters:
            break
        y = w + shift * x
        a = np.abs(y)
        safe = a > PHASE_FLOOR
        x = np.where(safe, y / np.where(safe, a, 1.0), x)
        iterations += 1

    final = PhaseVector(x)
    w = cmat @ final.vec
    grad_norm = float(np.linalg.norm(_grad_dir(w, final.vec)))
    cost = float(np.vdot(final.vec, w).real)
    beat = None
    if signal is not None:
        beat = bool(cost >= cost_z - 1e-12 * n * n)
    if not converged:
        logger.warning("no convergence in %d power steps (grad norm %.3e, tol %.3e)",
                       iterations, grad_norm, tol)
    return SolverReport(
        x=final, cost=cost, grad_norm=grad_norm,
        iterations=iterations, escapes=escapes,
        beat_planted=beat, converged=converged,
    )
