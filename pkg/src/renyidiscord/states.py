"""
Two-qubit initial states: X states and the (special) canonical-initial family.

Basis order is |00>, |01>, |10>, |11> with the first qubit A = dimer 1
(|0> = level 1, |1> = level 2) and the second qubit B = dimer 2
(|0> = level 3, |1> = level 4).
"""
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-10
SUM_TOL = 1e-12


class StateConstraintError(ValueError):
    """A state parameter violates one of the family's constraints."""

    def __init__(self, constraint, detail):
        super().__init__(f"violated constraint {constraint}: {detail}")
        self.constraint = constraint
        self.detail = detail

    def __reduce__(self):
        return type(self), (self.constraint, self.detail)


@dataclass
class ValidationReport:
    hermiticity: float
    trace: float
    min_eigenvalue: float
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(self.violations)


def validate_density_matrix(rho, tol=TOL):
    """
    Check Hermiticity, unit trace and positivity of ``rho``.

    Returns a report with the measured residuals and one message per violated
    property; never raises for a square input.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    trace_err = float(abs(np.trace(rho) - 1.0))
    min_ev = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    report = ValidationReport(herm, trace_err, min_ev)
    if herm > tol:
        report.violations.append(f"hermiticity: max |rho - rho^dagger| = {herm:.3e}")
    if trace_err > tol:
        report.violations.append(f"trace: |tr rho - 1| = {trace_err:.3e}")
    if min_ev < -tol:
        report.violations.append(f"positivity: min eigenvalue = {min_ev:.3e}")
    return report


def _require_valid(rho, constraint):
    report = validate_density_matrix(rho)
    if not report.ok:
        raise StateConstraintError(constraint, str(report))
    return rho


@dataclass(frozen=True)
class XStateParams:
    a: float
    b: float
    c: float
    d: float
    delta: complex = 0.0
    beta_off: complex = 0.0

    @classmethod
    def from_matrix(cls, rho):
        rho = np.asarray(rho)
        return cls(
            float(rho[0, 0].real),
            float(rho[1, 1].real),
            float(rho[2, 2].real),
            float(rho[3, 3].real),
            complex(rho[0, 3]),
            complex(rho[1, 2]),
        )


def x_state(p):
    """Assemble the X-shaped density matrix from ``XStateParams``."""
    a, b, c, d = p.a, p.b, p.c, p.d
    if min(a, b, c, d) < 0:
        raise StateConstraintError("a,b,c,d >= 0", f"populations {(a, b, c, d)}")
    if abs(a + b + c + d - 1.0) > SUM_TOL:
        raise StateConstraintError("a+b+c+d = 1", f"sum is {a + b + c + d!r}")
    if abs(p.delta) ** 2 > a * d:
        raise StateConstraintError(
            "|delta|^2 <= a*d", f"|delta|^2 = {abs(p.delta) ** 2:.6g} > ad = {a * d:.6g}"
        )
    if abs(p.beta_off) ** 2 > b * c:
        raise StateConstraintError(
            "|beta|^2 <= b*c",
            f"|beta|^2 = {abs(p.beta_off) ** 2:.6g} > bc = {b * c:.6g}",
        )
    delta, beta = complex(p.delta), complex(p.beta_off)
    rho = np.array(
        [
            [a, 0, 0, delta],
            [0, b, beta, 0],
            [0, beta.conjugate(), c, 0],
            [delta.conjugate(), 0, 0, d],
        ],
        dtype=complex,
    )
    return _require_valid(rho, "density matrix")


@dataclass(frozen=True)
class CIStateParams:
    C01: complex = 0.0
    C10: complex = 0.0
    C11: float = 0.0
    C22: float = 0.0
    C33: float = 0.0


def ci_state(p):
    """Canonical-initial state, entries placed exactly as in the defining matrix."""
    C01, C10 = complex(p.C01), complex(p.C10)
    C11, C22, C33 = float(p.C11), float(p.C22), float(p.C33)
    rho = 0.25 * np.array(
        [
            [1 + C33, C01, C10, C11 - C22],
            [C01.conjugate(), 1 - C33, C11 + C22, C10],
            [C10.conjugate(), C11 + C22, 1 - C33, C01],
            [C11 - C22, C10.conjugate(), C01.conjugate(), 1 + C33],
        ],
        dtype=complex,
    )
    return _require_valid(rho, "CI matrix PSD")


def sci_params(C33, C01, C11):
    """
    Complete the SCI parameters: ``C22 = -C11 C33`` and ``C10 = C11 C01``.
    Checks ``C33^2 + C01^2 <= 1``.
    """
    if C33**2 + abs(C01) ** 2 > 1.0 + SUM_TOL:
        raise StateConstraintError(
            "C33^2 + C01^2 <= 1", f"C33^2 + C01^2 = {C33**2 + abs(C01) ** 2:.6g}"
        )
    return CIStateParams(C01=C01, C10=C11 * C01, C11=C11, C22=-C11 * C33, C33=C33)


def sci_state(C33, C01, C11):
    """Special canonical-initial state from its three free parameters."""
    return ci_state(sci_params(C33, C01, C11))


def bell_diagonal_state(c1, c2, c3):
    """``(I + sum_i c_i sigma_i (x) sigma_i) / 4``."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])
    rho = 0.25 * (
        np.eye(4) + c1 * np.kron(sx, sx) + c2 * np.kron(sy, sy) + c3 * np.kron(sz, sz)
    )
    return _require_valid(rho, "Bell-diagonal PSD")
