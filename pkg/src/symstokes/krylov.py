"""Symmetric QMR with a symmetric (possibly indefinite) preconditioner.

The recurrences follow the multigrid-preconditioned SQMR iteration: the
preconditioner is applied to the updated residual-like vector ``s`` once per
step, and ``x`` is advanced through the correction vector ``d``.  Convergence
is judged on the true residual ``||b - L x|| / ||b||``, recomputed each step.
"""

from __future__ import annotations

import numpy as np

from .history import ResidualHistory
from .multigrid import SolveResult

BREAKDOWN = 1e-300


def _as_map(A):
    if callable(A):
        return A
    if hasattr(A, "apply"):
        return A.apply
    return lambda v: A @ v


def sqmr_solve(L, b, precond=None, tol: float = 1e-8, maxit: int = 200) -> SolveResult:
    """Solve ``L x = b`` from ``x0 = 0``.

    ``L`` and ``precond`` may be matrices, objects with ``apply``, or
    callables.  ``precond=None`` means the identity.
    """
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    apply_L = _as_map(L)
    apply_P = (lambda v: v.copy()) if precond is None else _as_map(precond)
    b = np.asarray(b, dtype=np.float64)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side must be finite")
    history = ResidualHistory()
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        history.record(0, 0.0)
        return SolveResult(x, history, "converged")
    history.record(0, 1.0)

    s = b.copy()
    t = apply_P(s)
    q = t.copy()
    tau = np.linalg.norm(t)
    nu_prev = 0.0
    rho = s @ q
    d = np.zeros_like(b)

    for j in range(1, maxit + 1):
        if abs(rho) < BREAKDOWN:
            return SolveResult(x, history, "breakdown")
        t = apply_L(q)
        sigma = q @ t
        if abs(sigma) < BREAKDOWN:
            return SolveResult(x, history, "breakdown")
        alpha = rho / sigma
        s = s - alpha * t
        t = apply_P(s)
        nu = np.linalg.norm(t) / tau
        c = 1.0 / np.sqrt(1.0 + nu * nu)
        tau = tau * nu * c
        d = (c * c * nu_prev * nu_prev) * d + (c * c * alpha) * q
        x = x + d
        rel = np.linalg.norm(b - apply_L(x)) / bnorm
        history.record(j, rel)
        if rel < tol:
            return SolveResult(x, history, "converged")
        if not np.isfinite(rel):
            return SolveResult(x, history, "breakdown")
        rho_next = s @ t
        beta = rho_next / rho
        rho = rho_next
        q = t + beta * q
        nu_prev = nu
    return SolveResult(x, history, "max-iterations")
