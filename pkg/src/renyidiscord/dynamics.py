"""
Reduced dynamics of two dimers, each level coupled to one of two Ising-coupled
spin baths that start in their joint canonical state.

Every dimer-bath coupling is diagonal in the collective ``S1z, S2z``, so the
evolution splits into sectors labelled by ``(j1, m1, j2, m2)``. Inside a
sector the dimers see a 4x4 Hamiltonian; the reduced state is the
Gibbs-weighted mixture of the sector orbits.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
import math

import numpy as np
from scipy.linalg import expm

from .matfun import dagger, unitary_exp
from .states import validate_density_matrix

MAX_BATH_SPINS = 64
MAX_BRUTEFORCE_DIM = 1024

# qubit swap, maps A (x) B ordering to B (x) A ordering and back
SWAP = np.eye(4)[[0, 2, 1, 3]]


@dataclass(frozen=True)
class DimerParams:
    """Level energies, transition amplitudes and bath couplings, in ps^-1."""

    eps: tuple = (0.0, 0.0, 0.0, 0.0)
    J1: float = 0.0
    J2: float = 0.0
    gamma: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(float(e) for e in self.eps))
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if len(self.eps) != 4 or len(self.gamma) != 4:
            raise ValueError("eps and gamma need exactly four entries")
        values = self.eps + self.gamma + (self.J1, self.J2)
        if not all(math.isfinite(v) for v in values):
            raise ValueError("dimer parameters must be finite")


@dataclass(frozen=True)
class BathParams:
    """Spin counts, bath frequencies, Ising strength ``q`` and temperature."""

    N1: int
    N2: int
    alpha1: float = 0.0
    alpha2: float = 0.0
    q: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        for N in (self.N1, self.N2):
            if int(N) != N or N <= 0 or N % 2 or N > MAX_BATH_SPINS:
                raise ValueError(
                    f"bath spin count {N} must be an even integer in [2, {MAX_BATH_SPINS}]"
                )
        if not self.T > 0:
            raise ValueError(f"temperature must be positive, got {self.T}")

    @property
    def beta(self):
        return 1.0 / self.T


@dataclass(frozen=True)
class BathSector:
    j1: float
    m1: float
    j2: float
    m2: float
    weight: float


def _half_integer(x, name):
    x = Fraction(x).limit_denominator(2)
    if x.denominator not in (1, 2) or 2 * x != int(2 * x):
        raise ValueError(f"{name} = {x} is not a half-integer")
    return x


def bath_degeneracy(N, j):
    """
    Number of spin-j multiplets among N spin-1/2 particles,
    ``(2j+1) N! / ((N/2 + j + 1)! (N/2 - j)!)``.
    """
    N = int(N)
    j = _half_integer(j, "j")
    if N < 0 or j < 0 or j > Fraction(N, 2) or (N - 2 * j) % 2:
        raise ValueError(f"no spin-{j} multiplet for N = {N}")
    top = int(Fraction(N, 2) + j)
    bottom = int(Fraction(N, 2) - j)
    return int((2 * j + 1) * factorial(N) // (factorial(top + 1) * factorial(bottom)))


def _spins(N):
    # (j, m) pairs of one bath, j descending from N/2 in unit steps
    pairs = []
    j = Fraction(N, 2)
    while j >= 0:
        m = -j
        while m <= j:
            pairs.append((j, m))
            m += 1
        j -= 1
    return pairs


def _bath_table(N):
    # per-bath arrays of j, m and log nu(N, j), one entry per (j, m)
    js, ms, lognu = [], [], []
    for j, m in _spins(N):
        js.append(float(j))
        ms.append(float(m))
        lognu.append(math.log(bath_degeneracy(N, j)))
    return np.array(js), np.array(ms), np.array(lognu)


def _log_weights(bath):
    j1, m1, l1 = _bath_table(bath.N1)
    j2, m2, l2 = _bath_table(bath.N2)
    energy = (
        bath.q * np.outer(m1, m2) + bath.alpha1 * m1[:, None] + bath.alpha2 * m2[None, :]
    )
    logs = l1[:, None] + l2[None, :] - bath.beta * energy
    rows = np.stack(
        np.broadcast_arrays(j1[:, None], m1[:, None], j2[None, :], m2[None, :]), axis=-1
    ).reshape(-1, 4)
    return rows, logs.ravel()


def log_partition_function(bath):
    _, logs = _log_weights(bath)
    shift = logs.max()
    return float(shift + math.log(math.fsum(np.exp(logs - shift))))


def partition_function(bath):
    """
    ``Z = sum nu(N1,j1) nu(N2,j2) exp(-beta (q m1 m2 + alpha1 m1 + alpha2 m2))``.

    Summed with the largest exponent factored out; overflows to ``inf`` only
    when Z itself exceeds the float range.
    """
    with np.errstate(over="ignore"):
        return float(np.exp(log_partition_function(bath)))


def bath_sectors(bath):
    """All sectors ``(j1, m1, j2, m2)`` with their normalized Gibbs weights."""
    rows, logs = _log_weights(bath)
    w = np.exp(logs - logs.max())
    w /= math.fsum(w)
    return [BathSector(*map(float, row), float(wk)) for row, wk in zip(rows, w)]


def _dimer_blocks(d, m1, m2):
    h1 = np.array(
        [[d.eps[0] + d.gamma[0] * m1, d.J1], [d.J1, d.eps[1] + d.gamma[1] * m2]],
        dtype=complex,
    )
    h2 = np.array(
        [[d.eps[2] + d.gamma[2] * m1, d.J2], [d.J2, d.eps[3] + d.gamma[3] * m2]],
        dtype=complex,
    )
    return h1, h2


def sector_hamiltonian(d, m1, m2):
    """
    Dimer Hamiltonian conditioned on bath magnetizations ``(m1, m2)``.

    Returned in the basis ``|3>|1>, |3>|2>, |4>|1>, |4>|2>`` (dimer 2 is the
    slow index). The bath energy ``q m1 m2 + alpha1 m1 + alpha2 m2`` is a
    global phase inside the sector and is left out.
    """
    h1, h2 = _dimer_blocks(d, float(m1), float(m2))
    return np.kron(np.eye(2), h1) + np.kron(h2, np.eye(2))


def _grouped_weights(bath):
    # sectors sharing (m1, m2) share a propagator
    grouped = {}
    for s in bath_sectors(bath):
        key = (s.m1, s.m2)
        grouped[key] = grouped.get(key, 0.0) + s.weight
    keys = sorted(grouped)
    return keys, np.array([grouped[k] for k in keys])


def _check_rho0(rho0):
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (4, 4):
        raise ValueError(f"initial dimer state must be 4x4, got {rho0.shape}")
    report = validate_density_matrix(rho0)
    if not report.ok:
        raise ValueError(f"invalid initial state: {report}")
    return rho0


def evolve_series(rho0, d, bath, times):
    """
    Reduced dimer state at each of ``times``; shape ``(len(times), 4, 4)``.

    ``rho0`` and the result use the two-qubit order A (x) B with A = dimer 1
    (levels 1, 2) and B = dimer 2 (levels 3, 4).
    """
    rho0 = _check_rho0(rho0)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("evolution times must be non-negative")
    keys, weights = _grouped_weights(bath)
    H = np.stack([SWAP @ sector_hamiltonian(d, m1, m2) @ SWAP for m1, m2 in keys])
    evals, evecs = np.linalg.eigh(H)
    # rho0 in each sector eigenbasis, then phases per time
    rho_eig = dagger(evecs) @ rho0 @ evecs
    out = np.empty((times.size, 4, 4), dtype=complex)
    gap = evals[:, :, None] - evals[:, None, :]
    for i, t in enumerate(times):
        rotated = rho_eig * np.exp(-1j * gap * t)
        orbit = evecs @ rotated @ dagger(evecs)
        rho_t = np.einsum("s,sij->ij", weights, orbit)
        out[i] = 0.5 * (rho_t + rho_t.conj().T)
    return out


def evolve(rho0, d, bath, t):
    """
    Reduced dimer state at time ``t``.

    Sums ``w_s U_s(t) rho0 U_s(t)^dagger`` over bath sectors, where
    ``U_s = exp(-i H_s t)`` and ``H_s`` is the sector Hamiltonian.
    """
    rho0 = _check_rho0(rho0)
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    keys, weights = _grouped_weights(bath)
    rho_t = np.zeros((4, 4), dtype=complex)
    for (m1, m2), w in zip(keys, weights):
        U = unitary_exp(SWAP @ sector_hamiltonian(d, m1, m2) @ SWAP, t)
        rho_t += w * (U @ rho0 @ U.conj().T)
    return 0.5 * (rho_t + rho_t.conj().T)


def _collective_sz(N):
    # S^z = sum_k sigma_z^k / 2 on N explicit spins, diagonal in the product basis
    bits = (np.arange(2**N)[:, None] >> np.arange(N)[::-1]) & 1
    return np.diag(0.5 * np.sum(1 - 2 * bits, axis=1))


def evolve_bruteforce(rho0, d, bath, t):
    """
    Reference evolution on the full dimer + bath space with explicit spins.

    Builds the total Hamiltonian term by term, starts from
    ``rho0 (x) exp(-beta H_bath) / Z``, propagates with ``scipy.linalg.expm``
    and traces out both baths. Only for tiny baths.
    """
    rho0 = _check_rho0(rho0)
    n1, n2 = 2**bath.N1, 2**bath.N2
    if bath.N1 > 6 or bath.N2 > 6 or 4 * n1 * n2 > MAX_BRUTEFORCE_DIM:
        raise ValueError(
            f"brute-force space 4*2^{bath.N1 + bath.N2} exceeds {MAX_BRUTEFORCE_DIM}"
        )
    I2 = np.eye(2)
    I1b, I2b = np.eye(n1), np.eye(n2)
    S1 = np.kron(_collective_sz(bath.N1), I2b)
    S2 = np.kron(I1b, _collective_sz(bath.N2))
    Ib = np.eye(n1 * n2)

    # dimer 1 levels |1>,|2> on the first qubit, dimer 2 levels |3>,|4> on the second
    ket = {1: (0, 0), 2: (0, 1), 3: (1, 0), 4: (1, 1)}

    def level(a):
        which, idx = ket[a]
        P = np.zeros((2, 2))
        P[idx, idx] = 1.0
        return np.kron(P, I2) if which == 0 else np.kron(I2, P)

    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    H_d = (
        d.eps[0] * level(1)
        + d.eps[1] * level(2)
        + d.J1 * np.kron(X, I2)
        + d.eps[2] * level(3)
        + d.eps[3] * level(4)
        + d.J2 * np.kron(I2, X)
    )
    H_bath = bath.alpha1 * S1 + bath.alpha2 * S2 + bath.q * S1 @ S2
    H = (
        np.kron(H_d, Ib)
        + np.kron(np.eye(4), H_bath)
        + d.gamma[0] * np.kron(level(1), S1)
        + d.gamma[1] * np.kron(level(2), S2)
        + d.gamma[2] * np.kron(level(3), S1)
        + d.gamma[3] * np.kron(level(4), S2)
    )

    gibbs = expm(-bath.beta * H_bath)
    rho_b = gibbs / np.trace(gibbs)
    U = expm(-1j * t * H)
    full = U @ np.kron(rho0, rho_b) @ U.conj().T
    nb = n1 * n2
    return np.einsum("ikjk->ij", full.reshape(4, nb, 4, nb))
