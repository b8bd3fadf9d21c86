"""
Matrix functions for small Hermitian operators.

Every function accepts stacked input of shape ``(..., n, n)`` so that a whole
grid of operators can be processed by one batched eigendecomposition.
"""
from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12


class InvalidOperatorError(ValueError):
    """Raised when an operator fails a structural check."""


class NotPSDError(InvalidOperatorError):
    """Raised when an operator expected to be PSD has a negative eigenvalue."""


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def hermitize(M):
    """Return ``(M + M^dagger) / 2``."""
    M = np.asarray(M)
    return 0.5 * (M + dagger(M))


def check_hermitian(M, tol=HERMITIAN_TOL):
    M = np.asarray(M)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise InvalidOperatorError(f"expected square matrix, got shape {M.shape}")
    residual = np.max(np.abs(M - dagger(M))) if M.size else 0.0
    if residual > tol:
        raise InvalidOperatorError(
            f"operator is not Hermitian (max |M - M^dagger| = {residual:.3e})"
        )
    return M


def eig_hermitian(M, tol=HERMITIAN_TOL):
    """
    Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    evals : ndarray
        Real eigenvalues in descending order.
    evecs : ndarray
        Orthonormal eigenvectors as columns, matching ``evals``.
    """
    M = check_hermitian(M, tol)
    evals, evecs = np.linalg.eigh(hermitize(M))
    return evals[..., ::-1], evecs[..., ::-1]


def _clip_psd(evals, cutoff):
    lam_max = np.max(evals, axis=-1, keepdims=True)
    scale = np.maximum(lam_max, 0.0)
    if np.any(evals < -PSD_TOL * scale) or np.any(lam_max < 0):
        worst = float(np.min(evals / np.where(scale > 0, scale, 1.0)))
        raise NotPSDError(f"operator is not PSD (relative eigenvalue {worst:.3e})")
    support = evals > cutoff * scale
    return np.where(support, evals, 0.0), support


def mat_pow_psd(M, p, support_cutoff=SUPPORT_CUTOFF):
    """
    Fractional power of a PSD matrix taken on its support.

    Eigenvalues at or below ``support_cutoff * lambda_max`` are sent to zero,
    so negative ``p`` yields the generalized (pseudo-inverse) power.
    """
    if support_cutoff <= 0:
        raise ValueError("support_cutoff must be positive")
    M = check_hermitian(M, max(HERMITIAN_TOL, PSD_TOL))
    evals, evecs = np.linalg.eigh(hermitize(M))
    evals, support = _clip_psd(evals, support_cutoff)
    safe = np.where(support, evals, 1.0)
    powered = np.where(support, safe ** p, 0.0)
    return (evecs * powered[..., None, :]) @ dagger(evecs)


def psd_eigvals(M, support_cutoff=SUPPORT_CUTOFF):
    """Eigenvalues of a PSD matrix with the off-support part set to zero."""
    M = check_hermitian(M, max(HERMITIAN_TOL, PSD_TOL))
    evals, _ = _clip_psd(np.linalg.eigvalsh(hermitize(M)), support_cutoff)
    return evals


def unitary_exp(H, t):
    """Propagator ``exp(-i H t)`` built from the eigendecomposition of ``H``."""
    H = check_hermitian(H)
    evals, evecs = np.linalg.eigh(hermitize(H))
    phases = np.exp(-1j * evals * t)
    return (evecs * phases[..., None, :]) @ dagger(evecs)


def tensor(*ops):
    """Kronecker product of the given operators, in order."""
    return reduce(np.kron, ops)


def _check_dims(M, dims):
    dims = tuple(int(d) for d in dims)
    n = M.shape[-1]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != n:
        raise InvalidOperatorError(
            f"subsystem dims {dims} do not multiply to operator dim {n}"
        )
    return dims


def partial_trace(M, dims, keep):
    """
    Trace out every factor of ``dims`` not listed in ``keep``.

    ``keep`` holds zero-based factor indices; the kept factors stay in their
    original order. Leading batch axes of ``M`` are preserved.
    """
    M = np.asarray(M)
    dims = _check_dims(M, dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise InvalidOperatorError(f"invalid keep indices {keep} for dims {dims}")
    n = len(dims)
    batch = M.shape[:-2]
    b = len(batch)
    T = M.reshape(batch + dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # highest index first so the remaining axis positions stay valid
    n_left = n
    for i in reversed(traced):
        T = np.trace(T, axis1=b + i, axis2=b + n_left + i)
        n_left -= 1
    kd = int(np.prod([dims[i] for i in keep]))
    return T.reshape(batch + (kd, kd))


def embed(M, dims, at):
    """
    Embed an operator on the consecutive factors starting at ``at`` into the
    full space described by ``dims``, acting as identity elsewhere.
    """
    M = np.asarray(M)
    left = int(np.prod(dims[:at]))
    sub = M.shape[-1]
    right = int(np.prod(dims)) // (left * sub)
    if left * sub * right != int(np.prod(dims)):
        raise InvalidOperatorError("embedded operator does not fit the given dims")
    out = M
    if right > 1:
        out = np.kron(out, np.eye(right))
    if left > 1:
        out = np.kron(np.eye(left), out)
    return out
