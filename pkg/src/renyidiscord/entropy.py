"""
Rényi and von Neumann entropies (base 2) and the two conditional mutual
informations of a tripartite state ordered as (X, E, B).
"""
import numpy as np

from .matfun import (
    NotPSDError,
    InvalidOperatorError,
    embed,
    hermitize,
    mat_pow_psd,
    partial_trace,
    psd_eigvals,
)

#: distance from 1 at which the Rényi forms fall back to von Neumann
VN_SWITCH = 1e-6

XEB_DIMS = (2, 4, 2)


class NumericalFailure(ArithmeticError):
    """An intermediate operator left the PSD cone; ``stage`` names the step."""

    def __init__(self, stage, detail):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage
        self.detail = detail

    def __reduce__(self):
        return type(self), (self.stage, self.detail)


def check_order(alpha, discord=False):
    """Validate a Rényi order; ``discord=True`` restricts it to (0, 1) ∪ (1, 2]."""
    alpha = float(alpha)
    upper = 2.0 if discord else np.inf
    if not (0.0 < alpha <= upper) or alpha == 1.0:
        domain = "(0,1)∪(1,2]" if discord else "(0,1)∪(1,inf)"
        raise ValueError(f"Rényi order {alpha} outside {domain}")
    return alpha


def _is_vn(alpha):
    return abs(alpha - 1.0) < VN_SWITCH


def von_neumann_entropy(rho):
    """``-tr(rho log2 rho)`` over the support of ``rho``."""
    lam = psd_eigvals(rho)
    logs = np.log2(np.where(lam > 0, lam, 1.0))
    return -np.sum(lam * logs, axis=-1)


def renyi_entropy(rho, alpha):
    r"""
    Rényi entropy :math:`\frac{1}{1-\alpha}\log_2\mathrm{Tr}\,\rho^\alpha`.

    Orders within ``VN_SWITCH`` of 1 return the von Neumann entropy.
    """
    alpha = float(alpha)
    if _is_vn(alpha):
        return von_neumann_entropy(rho)
    alpha = check_order(alpha)
    lam = psd_eigvals(rho)
    safe = np.where(lam > 0, lam, 1.0)
    tr = np.sum(np.where(lam > 0, safe**alpha, 0.0), axis=-1)
    return np.log2(tr) / (1.0 - alpha)


def _check_xeb(tau, dims):
    tau = np.asarray(tau)
    dims = tuple(dims)
    if len(dims) != 3 or tau.shape[-1] != int(np.prod(dims)):
        raise InvalidOperatorError(
            f"expected a (X, E, B) state, got dims {dims} for shape {tau.shape}"
        )
    return tau, dims


def vn_cmi(tau, dims=XEB_DIMS):
    """``I(E;B|X) = S(EX) + S(BX) - S(X) - S(EBX)``."""
    tau, dims = _check_xeb(tau, dims)
    s_ex = von_neumann_entropy(partial_trace(tau, dims, (0, 1)))
    s_bx = von_neumann_entropy(partial_trace(tau, dims, (0, 2)))
    s_x = von_neumann_entropy(partial_trace(tau, dims, (0,)))
    s_exb = von_neumann_entropy(tau)
    return s_ex + s_bx - s_x - s_exb


def _pow(M, p, stage):
    try:
        return mat_pow_psd(M, p)
    except NotPSDError as exc:
        raise NumericalFailure(stage, str(exc)) from exc


def renyi_cmi(tau, alpha, dims=XEB_DIMS):
    """
    Sandwiched Rényi conditional mutual information ``I_alpha(E;B|X)``.

    Parameters
    ----------
    tau : ndarray, shape (..., d, d)
        State (or stack of states) with factor order (X, E, B).
    alpha : float
        Order in (0, 1) ∪ (1, 2]; values within 1e-6 of 1 use ``vn_cmi``.
    dims : tuple of int
        Factor dimensions (X, E, B).

    Returns
    -------
    float or ndarray
        Value in bits, one per stacked state.
    """
    alpha = float(alpha)
    tau, dims = _check_xeb(tau, dims)
    if _is_vn(alpha):
        return vn_cmi(tau, dims)
    alpha = check_order(alpha, discord=True)
    dx, de, db = dims

    rho_ex = partial_trace(tau, dims, (0, 1))
    rho_x = partial_trace(tau, dims, (0,))

    ex_side = embed(_pow(rho_ex, (1 - alpha) / 2, "rho_EX power"), dims, 0)
    G = ex_side @ _pow(tau, alpha, "tau power") @ ex_side
    K = partial_trace(G, dims, (0, 2))

    xb_dims = (dx, db)
    x_side = embed(_pow(rho_x, (alpha - 1) / 2, "rho_X power"), xb_dims, 0)
    L = hermitize(x_side @ K @ x_side)
    try:
        lam = psd_eigvals(L)
    except NotPSDError as exc:
        raise NumericalFailure("final trace power", str(exc)) from exc
    safe = np.where(lam > 0, lam, 1.0)
    tr = np.sum(np.where(lam > 0, safe ** (1.0 / alpha), 0.0), axis=-1)
    return alpha / (alpha - 1.0) * np.log2(tr)
