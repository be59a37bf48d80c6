"""Closed-form one-body resolvent matrix elements for Lorentzian packets.

Everything here evaluates <chi|(zeta - h)^-1|chi> and relatives on the
retarded sheet (Im omega > 0), for the free kinetic Hamiltonian and for the
rank-one attractive dressing.  These are the semi-analytic building blocks
shared by the model modules and the quadrature oracles.
"""

from __future__ import annotations

import cmath


class OneBodyError(Exception):
    pass


class BranchAmbiguity(OneBodyError):
    """zeta sits on (or hair-close to) the continuum cut [0, inf)."""


def retarded_omega(zeta: complex, a: float) -> complex:
    """Upper-half-plane root omega of zeta = a*omega**2.

    Raises BranchAmbiguity within 1e-12 of the cut zeta in [0, inf).
    """
    zeta = complex(zeta)
    if abs(zeta.imag) < 1e-12 and zeta.real >= -1e-12:
        raise BranchAmbiguity(f"zeta={zeta} on the continuum cut; supply Im z != 0")
    w = 1j * cmath.sqrt(-zeta / a)
    if w.imag < 0:
        w = -w
    return w


def free_resolvent(zeta: complex, a: float, gamma: float) -> complex:
    """<chi|(zeta - a p^2)^-1|chi> for the centered Lorentzian packet."""
    w = retarded_omega(zeta, a)
    return 1.0 / (a * w * (w + 1j * gamma))


def free_resolvent_deriv(zeta: complex, a: float, gamma: float) -> complex:
    """d/dzeta of free_resolvent on the same sheet."""
    w = retarded_omega(zeta, a)
    dw = 1.0 / (2.0 * a * w)
    g = a * w * (w + 1j * gamma)
    dg_dw = a * (2.0 * w + 1j * gamma)
    return -dg_dw * dw / g ** 2


def free_resolvent_on_cut(eta: float, a: float, gamma: float) -> complex:
    """Boundary value from above, eta + i0 with eta > 0 (omega real > 0)."""
    if eta <= 0:
        raise OneBodyError("cut boundary value needs eta > 0")
    w = cmath.sqrt(eta / a).real
    return 1.0 / (a * w * (w + 1j * gamma))


def dressed_resolvent(zeta: complex, a: float, gamma: float, lam: float) -> complex:
    """<chi|(zeta - a p^2 + lam |chi><chi|)^-1|chi> via the rank-one update:
    g / (1 + lam * g) with g the free matrix element."""
    g = free_resolvent(zeta, a, gamma)
    return g / (1.0 + lam * g)


def dressed_resolvent_on_cut(eta: float, a: float, gamma: float, lam: float) -> complex:
    g = free_resolvent_on_cut(eta, a, gamma)
    return g / (1.0 + lam * g)


def bound_state_energy(a: float, gamma: float, lam: float) -> float:
    """Physical bound-state energy of the dressed one-body Hamiltonian:
    the root of (eta + lam)^2 + a*gamma^2*eta with Im omega_0 > 0."""
    A = a * gamma * gamma
    disc = A * (A + 4.0 * lam)
    nu = (-a * gamma + (a * a * gamma * gamma + 4.0 * a * lam) ** 0.5) / (2.0 * a)
    return -a * nu * nu


def bound_state_residue(a: float, gamma: float, lam: float) -> float:
    """Residue of the dressed resolvent at its bound-state pole
    (equals |<chi|bound>|^2 / <bound|bound> > 0)."""
    eta0 = bound_state_energy(a, gamma, lam)
    w = 1j * cmath.sqrt(complex(-eta0 / a))
    dw = 1.0 / (2.0 * a * w)
    g = a * w * (w + 1j * gamma)
    dg = a * (2.0 * w + 1j * gamma) * dw
    gp = (-dg / g ** 2)  # d free_resolvent / d eta at eta0
    res = -1.0 / (lam * lam * gp)
    return float(res.real)
