"""
Projective measurements on qubit A, the measurement isometry A -> X E, and
the measurement infimum that defines von Neumann and Rényi discord.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .entropy import check_order, renyi_cmi, von_neumann_entropy, VN_SWITCH
from .matfun import InvalidOperatorError, dagger, partial_trace

AB_DIMS = (2, 2)
XEB_DIMS = (2, 4, 2)


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Rank-1 projective measurement along the Bloch vector (theta, phi)."""

    theta: float
    phi: float

    def normalized(self):
        """Equivalent angles with theta in [0, pi] and phi in [0, 2 pi)."""
        n = bloch_vector(self.theta, self.phi)
        theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
        phi = float(np.arctan2(n[1], n[0]) % (2 * np.pi))
        if np.isclose(np.sin(theta), 0.0, atol=1e-15):
            phi = 0.0
        return ProjectiveMeasurement(theta, phi)


@dataclass(frozen=True)
class OptimizerSettings:
    grid_theta: int = 32
    grid_phi: int = 64
    refine_tol: float = 1e-8
    max_iters: int = 200

    def __post_init__(self):
        if self.grid_theta < 2 or self.grid_phi < 1:
            raise ValueError("measurement grid needs grid_theta >= 2, grid_phi >= 1")
        if self.refine_tol <= 0 or self.max_iters < 0:
            raise ValueError("refine_tol must be positive and max_iters non-negative")


@dataclass(frozen=True)
class DiscordResult:
    value: float
    argmin: ProjectiveMeasurement
    evaluations: int
    converged: bool


def bloch_vector(theta, phi):
    return np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )


def _projectors(theta, phi):
    # shape (..., 2, 2, 2): outcome index, then the 2x2 projector
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    e = np.exp(1j * phi)
    n0 = np.stack([c + 0j, e * s], axis=-1)
    n1 = np.stack([s + 0j, -e * c], axis=-1)
    kets = np.stack([n0, n1], axis=-2)
    return kets[..., :, :, None] * np.conj(kets[..., :, None, :])


def povm_elements(m):
    """The pair ``(|n><n|, |n_perp><n_perp|)`` for measurement ``m``."""
    P = _projectors(m.theta, m.phi)
    return P[0], P[1]


def measurement_isometry(theta, phi):
    """
    Isometry ``A -> X (x) E`` with ``E = A' (x) outcome copy`` (shape 8x2).

    Maps ``|psi>`` to ``sum_k |k>_X (x) Pi_k |psi> (x) |k>``; for projectors
    ``sqrt(Pi_k) = Pi_k``.
    """
    P = _projectors(theta, phi)
    batch = P.shape[:-3]
    V = np.zeros(batch + (2, 2, 2, 2), dtype=complex)  # (x, a', k, a)
    for k in range(2):
        V[..., k, :, k, :] = P[..., k, :, :]
    return V.reshape(batch + (8, 2))


def isometry_apply(rho_ab, m):
    """
    Measured extension ``tau_XEB`` of a two-qubit state, factor order (X, E, B).

    ``m`` is a ``ProjectiveMeasurement`` or a ``(theta, phi)`` pair of arrays,
    in which case a stack of states is returned.
    """
    rho_ab = np.asarray(rho_ab)
    if rho_ab.shape[-2:] != (4, 4):
        raise InvalidOperatorError(f"expected a 4x4 two-qubit state, got {rho_ab.shape}")
    theta, phi = (m.theta, m.phi) if isinstance(m, ProjectiveMeasurement) else m
    V = measurement_isometry(theta, phi)
    W = np.einsum("...ia,bc->...ibac", V, np.eye(2)).reshape(V.shape[:-2] + (16, 4))
    return W @ rho_ab @ dagger(W)


def _conditional_entropy_term(rho_ab, theta, phi):
    # sum_k p_k S(rho_B^k) for each measurement in the stack
    P = _projectors(theta, phi)
    total = 0.0
    for k in range(2):
        Pk = np.einsum("...ij,kl->...ikjl", P[..., k, :, :], np.eye(2)).reshape(
            P.shape[:-3] + (4, 4)
        )
        post = Pk @ rho_ab @ Pk
        p = np.real(np.trace(post, axis1=-2, axis2=-1))
        unnorm = partial_trace(post, AB_DIMS, (1,))
        safe_p = np.where(p > 1e-300, p, 1.0)
        rho_b = unnorm / safe_p[..., None, None]
        ent = np.where(p > 1e-300, von_neumann_entropy(rho_b), 0.0)
        total = total + p * ent
    return total


def _minimize(objective, opt):
    """Grid search over (theta, phi) then Nelder-Mead from the best node."""
    thetas = np.linspace(0.0, np.pi, opt.grid_theta)
    phis = np.linspace(0.0, 2 * np.pi, opt.grid_phi, endpoint=False)
    T, P = np.meshgrid(thetas, phis, indexing="ij")
    values = np.asarray(objective(T.ravel(), P.ravel()), dtype=float)
    best = int(np.argmin(values))
    x0 = np.array([T.ravel()[best], P.ravel()[best]])
    best_val = float(values[best])
    evaluations = values.size

    if opt.max_iters == 0:
        return DiscordResult(
            best_val, ProjectiveMeasurement(*x0).normalized(), evaluations, False
        )

    dt = np.pi / (opt.grid_theta - 1)
    dp = 2 * np.pi / opt.grid_phi
    simplex = np.array([x0, x0 + [dt / 2, 0.0], x0 + [0.0, dp / 2]])

    def scalar(x):
        return float(objective(np.array([x[0]]), np.array([x[1]]))[0])

    res = minimize(
        scalar,
        x0,
        method="Nelder-Mead",
        options={
            "xatol": 1e-7,
            "fatol": opt.refine_tol,
            "maxiter": opt.max_iters,
            "initial_simplex": simplex,
        },
    )
    evaluations += int(res.nfev)
    if res.fun < best_val:
        best_val, x0 = float(res.fun), res.x
    return DiscordResult(
        best_val, ProjectiveMeasurement(*x0).normalized(), evaluations, bool(res.success)
    )


def renyi_discord(rho_ab, alpha, opt=None):
    """
    Rényi discord: minimum of ``renyi_cmi`` over projective measurements on A.

    Orders within 1e-6 of 1 evaluate the von Neumann conditional mutual
    information of the same extension.
    """
    opt = opt or OptimizerSettings()
    alpha = float(alpha)
    if abs(alpha - 1.0) >= VN_SWITCH:
        check_order(alpha, discord=True)
    rho_ab = np.asarray(rho_ab, dtype=complex)

    def objective(theta, phi):
        return renyi_cmi(isometry_apply(rho_ab, (theta, phi)), alpha, XEB_DIMS)

    return _minimize(objective, opt)


def vn_discord(rho_ab, opt=None):
    """
    Ollivier-Zurek discord with the measurement on A,
    ``min sum_k p_k S(rho_B^k) + S(rho_A) - S(rho_AB)``.
    """
    opt = opt or OptimizerSettings()
    rho_ab = np.asarray(rho_ab, dtype=complex)
    s_a = von_neumann_entropy(partial_trace(rho_ab, AB_DIMS, (0,)))
    s_ab = von_neumann_entropy(rho_ab)

    def objective(theta, phi):
        return _conditional_entropy_term(rho_ab, theta, phi) + s_a - s_ab

    return _minimize(objective, opt)
