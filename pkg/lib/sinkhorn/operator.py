import numpy as np
from ..config.base import InvalidInputError, NonConvergenceError
from ..config.enums import GradMode
from ..config.sinkhorn import IMPLICIT_RESIDUAL_THRESHOLD, SinkhornConfig
from ..nn.matrix import Matrix, as_matrix, require_finite, require_shape, require_square
from ..nn.tape import Tape, Var, logsumexp


def _check_input(x: Matrix) -> Matrix:
    x = as_matrix(x, name="sinkhorn input")
    require_square(x, name="sinkhorn input")
    require_finite(x, name="sinkhorn input")
    return x


def sinkhorn(x: Matrix, cfg: SinkhornConfig) -> Matrix:
    """S_tau^(t)(X): exp(X/tau) followed by t rounds of row then column normalization.

    Columns are normalized last, so they sum to 1 up to rounding; the row
    residual shrinks as `cfg.iters` grows.
    """
    x = _check_input(x)
    if cfg.log_domain:
        log_plan = x / cfg.tau
        for _ in range(cfg.iters):
            log_plan = log_plan - logsumexp(log_plan, axis=1)
            log_plan = log_plan - logsumexp(log_plan, axis=0)
        return np.exp(log_plan)

    plan = np.exp(x / cfg.tau)
    for _ in range(cfg.iters):
        plan = plan / plan.sum(axis=1, keepdims=True)
        plan = plan / plan.sum(axis=0, keepdims=True)
    return plan


def marginal_residual(plan: Matrix) -> float:
    """Largest deviation of a row or column sum from 1."""
    rows = np.abs(plan.sum(axis=1) - 1.0).max()
    cols = np.abs(plan.sum(axis=0) - 1.0).max()
    return float(max(rows, cols))


def _implicit_vjp(plan: Matrix, tau: float, upstream: Matrix) -> Matrix:
    # Adjoint of the fixed point P = exp((X - f 1^T - 1 g^T) / tau) under unit
    # marginals. The system is rank deficient by one (shift between the two
    # dual vectors), which lstsq resolves with the minimum-norm solution.
    n = plan.shape[0]
    weighted = upstream * plan
    rhs = np.concatenate([weighted.sum(axis=1), weighted.sum(axis=0)])
    system = np.block([[np.eye(n), plan], [plan.T, np.eye(n)]])
    duals = np.linalg.lstsq(system, rhs, rcond=None)[0]
    row_dual = duals[:n].reshape(-1, 1)
    col_dual = duals[n:].reshape(1, -1)
    return plan * (upstream - row_dual - col_dual) / tau


def _converged(x: Matrix, cfg: SinkhornConfig) -> Matrix:
    plan = sinkhorn(x, cfg)
    residual = marginal_residual(plan)
    if residual >= IMPLICIT_RESIDUAL_THRESHOLD:
        raise NonConvergenceError(residual, IMPLICIT_RESIDUAL_THRESHOLD)
    return plan


def record_sinkhorn(tape: Tape, x: Var, cfg: SinkhornConfig) -> Var:
    """Record S_tau(x) on a tape, differentiable per `cfg.grad_mode`."""
    value = _check_input(x.value)

    if cfg.grad_mode == GradMode.IMPLICIT:
        plan = _converged(value, cfg)
        return tape.custom(x, plan, lambda upstream: _implicit_vjp(plan, cfg.tau, upstream))

    if cfg.log_domain:
        log_plan = x * (1.0 / cfg.tau)
        for _ in range(cfg.iters):
            log_plan = tape.log_normalize_cols(tape.log_normalize_rows(log_plan))
        return tape.exp(log_plan)

    plan_var = tape.exp(x * (1.0 / cfg.tau))
    for _ in range(cfg.iters):
        plan_var = tape.normalize_cols(tape.normalize_rows(plan_var))
    return plan_var


def sinkhorn_vjp(x: Matrix, cfg: SinkhornConfig, upstream: Matrix) -> Matrix:
    """Gradient of <upstream, S_tau(X)> with respect to X."""
    x = _check_input(x)
    upstream = as_matrix(upstream, name="upstream")
    require_shape(upstream, x.shape, name="upstream")

    if cfg.grad_mode == GradMode.IMPLICIT:
        return _implicit_vjp(_converged(x, cfg), cfg.tau, upstream)

    tape = Tape()
    leaf = tape.leaf(x)
    objective = (record_sinkhorn(tape, leaf, cfg) * tape.constant(upstream)).sum()
    return tape.gradients(objective, [leaf])[0]


def entropy(plan: Matrix) -> float:
    """h(P) = -sum P log P, with 0 log 0 = 0."""
    plan = as_matrix(plan, name="plan")
    if np.any(plan < 0.0):
        raise InvalidInputError("Entropy requires nonnegative entries")
    positive = plan[plan > 0.0]
    return float(-np.sum(positive * np.log(positive)))
