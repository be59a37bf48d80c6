"""Second soluble model: particle 1 carries a rank-one attractive potential.

The potential binds exactly one state for any positive strength, so the
energy plane gains a one-body threshold at the bound-state energy alongside
the two-body threshold at zero.  This module derives the modified
stationarity system, its degree-7 amplitude condition (degree 5 in z), the
singularity-locating resultant in z, the local reciprocal-amplitude and
pseudo-momentum expansions at the one-body threshold, and the border curve
above which a near-threshold root turns physical.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import onebody, rootfind
from .model_free import (
    DenominatorVanishes,
    LinearCoefficientZero,
    ModelError,
    OutsideWindow,
    _cancel_known,
    _fr,
    _mc,
    _mv,
    _sign_fix_on_z,
    _stationarity_numerator,
    _subs_ratfunc,
)
from .polycore import BiPoly, MPoly, Poly, RatFunc, primitive_in, resultant


class ComplexRoots(ModelError):
    """Bound-state quadratic has no real roots (cannot happen for
    positive parameters; guarded for exotic inputs)."""


class BoundStatePole(ModelError):
    pass


class BracketFailure(ModelError):
    pass


@dataclass(frozen=True)
class ModelBoundParams:
    """Model-1 parameters plus the separable attraction strength lam > 0."""

    a1: Fraction = Fraction(1)
    a2: Fraction = Fraction(2)
    gamma1: Fraction = Fraction(1)
    gamma2: Fraction = Fraction(1)
    lam: Fraction = Fraction(2)

    def __post_init__(self):
        for name in ("a1", "a2", "gamma1", "gamma2", "lam"):
            object.__setattr__(self, name, _fr(getattr(self, name)))
        if self.a1 <= 0 or self.a2 <= 0 or self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ModelError("a_i and gamma_i must be positive")
        if self.lam < 0:
            raise ModelError("lam must be nonnegative")

    @property
    def A1(self) -> Fraction:
        return self.a1 * self.gamma1 ** 2

    @property
    def A2(self) -> Fraction:
        return self.a2 * self.gamma2 ** 2

    def key(self):
        return (self.a1, self.a2, self.gamma1, self.gamma2, self.lam)


# a1 = gamma1 = A1 = gamma2 = 1, a2 = A2 = lam = 2 reproduces the reference
# degree-7 polynomial of the analysis
REFERENCE_PARAMS = ModelBoundParams()


@dataclass
class BoundState:
    eta0: float
    omega0: complex
    physical: bool


def bound_state(params: ModelBoundParams = REFERENCE_PARAMS):
    """Both roots of the bound-state condition, physical one first.

    The condition is the omega-plane quadratic lam + a1*w*(w + i*gamma1) = 0;
    the physical root has Im w > 0 (equivalently Re x > 0 for x = -i*w).
    """
    a1, g1, lam = float(params.a1), float(params.gamma1), float(params.lam)
    if lam <= 0:
        raise ModelError("bound state requires lam > 0")
    disc = a1 * a1 * g1 * g1 + 4.0 * a1 * lam
    if disc < 0:
        raise ComplexRoots(f"bound-state discriminant {disc} < 0")
    s = math.sqrt(disc)
    nu_plus = (-a1 * g1 + s) / (2.0 * a1)
    nu_minus = (-a1 * g1 - s) / (2.0 * a1)
    phys = BoundState(eta0=-a1 * nu_plus ** 2, omega0=1j * nu_plus, physical=True)
    unphys = BoundState(eta0=-a1 * nu_minus ** 2, omega0=1j * nu_minus, physical=False)
    return {"physical": phys, "unphysical": unphys}


def script_I1(eta1: complex, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    """Dressed matrix element I1/(1 - lam*I1); diverges at the bound-state
    energy (pole of the dressed propagator)."""
    a1, g1, lam = float(params.a1), float(params.gamma1), float(params.lam)
    I1 = -onebody.free_resolvent(eta1, a1, g1)
    denom = 1.0 - lam * I1
    if abs(denom) < 1e-12:
        raise BoundStatePole(f"1 - lam*I1 ~ {abs(denom):.2e} at eta1={eta1}")
    return I1 / denom


# ---------------------------------------------------------------------------
# derived system
# ---------------------------------------------------------------------------

def _stationarity1_dressed(a1, g1, a2, lam):
    """Particle-1 stationarity with the dressed propagator.

    The dressed matrix element in pseudo-momentum form is
    script_I1(x) = 1/(a1*x*(x+g1) - lam); the condition reads
    -2*a1*x*I/(dI/dx) = z + a1 x^2 + a2 y^2.  Returns the cleared numerator.
    """
    x, y, z = _mv("x"), _mv("y"), _mv("z")
    Q = _mc(a1) * x * (x + _mc(g1)) - _mc(lam)
    I = RatFunc(_mc(1), Q)
    dI = I.derivative("x")
    lhs = RatFunc(_mc(-2 * a1)) * RatFunc(x) * I / dI
    rhs = z + _mc(a1) * x * x + _mc(a2) * y * y
    eq = lhs - RatFunc(rhs)
    num, den = _cancel_known(eq.num, eq.den, [Q, Q.derivative("x")])
    if den.degree_in("y") > 0 or den.degree_in("z") > 0:
        raise ModelError("dressed stationarity denominator still couples the system")
    return num


@lru_cache(maxsize=32)
def _derived_system2(key):
    a1, a2, g1, g2, lam = key
    # particle 2 free, particle 1 dressed
    S1 = _sign_fix_on_z(_stationarity_numerator(a2, a1, g2, "y", "x"))
    S2 = _sign_fix_on_z(_stationarity1_dressed(a1, g1, a2, lam))

    s2_y = S2.coeffs_in("y")
    s1_y = S1.coeffs_in("y")
    if len(s2_y) != 3 or not s2_y[1].is_zero() or len(s1_y) != 3:
        raise ModelError("unexpected y-structure in dressed system")
    y2 = RatFunc(-s2_y[0], s2_y[2])
    y_rf = -(RatFunc(s1_y[2]) * y2 + RatFunc(s1_y[0])) / RatFunc(s1_y[1])
    x = _mv("x")
    y_num, y_den = _cancel_known(
        y_rf.num, y_rf.den,
        [_mc(2) * x + _mc(g1), _mc(a1) * x ** 2 + _mv("z"), x,
         _mc(a1) * x * (x + _mc(g1)) - _mc(lam)])

    # amplitude: D = (eta1 + eta2 - z) * scriptI1 * I2, cleared
    y, z, D = _mv("y"), _mv("z"), _mv("D")
    Q = _mc(a1) * x * (x + _mc(g1)) - _mc(lam)
    drel = (D * Q * _mc(a2) * y * (y + _mc(g2))
            + _mc(a1) * x * x + _mc(a2) * y * y + z)
    amp = _subs_ratfunc(drel, "y", RatFunc(y_num, y_den))
    amp_c = amp.coeffs_in("D")

    res_x = primitive_in(resultant(S1, S2, "y").drop_var("y").drop_var("D"), "x")
    res_y = primitive_in(resultant(S1, S2, "x").drop_var("x").drop_var("D"), "y")
    return {
        "S1": S1, "S2": S2,
        "y_num": y_num, "y_den": y_den,
        "alpha": amp_c[1], "beta": amp_c[0],
        "res_x": res_x, "res_y": res_y,
    }


def system_polys2(params: ModelBoundParams):
    """Derived stationarity polynomials (S1 from particle 2, S2 from the
    dressed particle 1) in (x, y, z)."""
    d = _derived_system2(params.key())
    return d["S1"], d["S2"]


def system_residual2(x, y, z, params: ModelBoundParams = REFERENCE_PARAMS):
    S1, S2 = system_polys2(params)
    env = {"x": complex(x), "y": complex(y), "z": complex(z), "D": 0.0}
    return S1.eval_complex(env), S2.eval_complex(env)


def y_of_x2(x, z, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    d = _derived_system2(params.key())
    env = {"x": complex(x), "y": 0.0, "z": complex(z), "D": 0.0}
    den = d["y_den"].eval_complex(env)
    scale = max(1.0, abs(x)) ** 4 * max(1.0, abs(z))
    if abs(den) < 1e-12 * scale:
        raise DenominatorVanishes(f"y completion denominator ~ {abs(den):.2e} at x={x}")
    return d["y_num"].eval_complex(env) / den


def amplitude_of_x2(x, z, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    d = _derived_system2(params.key())
    env = {"x": complex(x), "y": 0.0, "z": complex(z), "D": 0.0}
    alpha = d["alpha"].eval_complex(env)
    beta = d["beta"].eval_complex(env)
    if abs(alpha) < 1e-12 * max(1.0, abs(x)) ** 8:
        raise LinearCoefficientZero(f"amplitude relation degenerate at x={x}, z={z}")
    return -beta / alpha


def amplitude_direct2(x, y, z, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    """Saddle value D = (eta1 + eta2 - z) * scriptI1 * I2 through the closed
    forms (the independent route)."""
    a1, a2 = float(params.a1), float(params.a2)
    g2 = float(params.gamma2)
    eta1 = -a1 * complex(x) ** 2
    eta2 = -a2 * complex(y) ** 2
    sI1 = script_I1(eta1, params)
    w2 = 1j * complex(y)
    I2 = -1.0 / (a2 * w2 * (w2 + 1j * g2))
    return (eta1 + eta2 - complex(z)) * sI1 * I2


def resultant_x2(params: ModelBoundParams = REFERENCE_PARAMS) -> BiPoly:
    """Degree-7 x-elimination of the dressed system."""
    d = _derived_system2(params.key())
    return d["res_x"].to_bipoly("x", "z")


def resultant_y2(params: ModelBoundParams = REFERENCE_PARAMS) -> BiPoly:
    """Mirror elimination: degree-7 polynomial in y with z coefficients."""
    d = _derived_system2(params.key())
    return d["res_y"].to_bipoly("y", "z")


@lru_cache(maxsize=16)
def _P_mpoly(key) -> MPoly:
    d = _derived_system2(key)
    amp = d["alpha"] * _mv("D") + d["beta"]
    raw = resultant(d["res_x"].lift(_mv("D").vars), amp, "x").drop_var("x").drop_var("y")
    return primitive_in(raw, "D")


def P_polynomial(params: ModelBoundParams = REFERENCE_PARAMS) -> BiPoly:
    """Degree-7 amplitude condition with degree-5 z coefficients, derived by
    exact elimination of x and y and normalized to content 1 in D."""
    return _P_mpoly(params.key()).to_bipoly("D", "z")


def resultant_R(params: ModelBoundParams = REFERENCE_PARAMS) -> Poly:
    """Resultant of the amplitude condition with its D-derivative: the
    z-polynomial whose roots locate all branchings and divergences."""
    P = _P_mpoly(params.key())
    raw = resultant(P, P.derivative("D"), "D")
    return raw.canonical().to_poly("z")


# ---------------------------------------------------------------------------
# branch evaluation
# ---------------------------------------------------------------------------

def pair_for_root2(x, z, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    """y partner of an x-elimination root, falling back to the mirrored
    elimination when the completion formula hits its pole set."""
    try:
        return y_of_x2(x, z, params)
    except DenominatorVanishes:
        S1, S2 = system_polys2(params)
        ys = rootfind.all_roots(resultant_y2(params).eval_at_z(z)).roots
        best, best_err = None, math.inf
        for yc in ys:
            env = {"x": complex(x), "y": complex(yc), "z": complex(z), "D": 0.0}
            err = abs(S1.eval_complex(env)) + abs(S2.eval_complex(env))
            if err < best_err:
                best, best_err = yc, err
        return complex(best)


def branch_points2(z, params: ModelBoundParams = REFERENCE_PARAMS):
    """(x, y, D) triples for all seven branches at numeric z."""
    z = complex(z)
    roots = rootfind.all_roots(resultant_x2(params).eval_at_z(z)).roots
    out = []
    for x in roots:
        y = pair_for_root2(x, z, params)
        D = amplitude_of_x2(x, z, params)
        out.append((complex(x), complex(y), complex(D)))
    return out


# ---------------------------------------------------------------------------
# one-body threshold analysis
# ---------------------------------------------------------------------------

def local_threshold(z, params: ModelBoundParams = REFERENCE_PARAMS) -> dict:
    """Leading-order predictions near the one-body threshold z = eta0 = -1
    (reference parameters): reciprocal-amplitude branches d = +-3*sqrt(-Z)/sqrt(2)
    with Z = z + 1, the pseudo-momentum series y(Z') to fifth order with
    Z' = sqrt(Z/2), the x relation x = 1 + 2 y^2, and the unphysical-threshold
    law d = +-3*sqrt(-4-z)/(2*sqrt(2)) near z = -4."""
    if params.key() != REFERENCE_PARAMS.key():
        raise ModelError("local threshold expansions are stated for the reference parameters")
    z = complex(z)
    Z = z + 1.0
    if abs(Z) > 0.05:
        raise OutsideWindow(f"|z+1|={abs(Z):.3g} outside the 0.05 window")
    d_branches = []
    if Z != 0:
        s = cmath.sqrt(-Z)
        d_branches = [3.0 * s / math.sqrt(2.0), -3.0 * s / math.sqrt(2.0)]
    Zp = cmath.sqrt(Z / 2.0)
    series = (1j * Zp - (1j / 3.0) * Zp ** 3 - (2.0 / 3.0) * Zp ** 4
              + (13j / 18.0) * Zp ** 5)
    series_conj = (-1j * Zp + (1j / 3.0) * Zp ** 3 - (2.0 / 3.0) * Zp ** 4
                   - (13j / 18.0) * Zp ** 5)
    y_branches = [series, series_conj]
    x_rel = [1.0 + 2.0 * yb ** 2 for yb in y_branches]
    s4 = cmath.sqrt(-4.0 - z)
    d_unphys = [3.0 * s4 / (2.0 * math.sqrt(2.0)), -3.0 * s4 / (2.0 * math.sqrt(2.0))]
    return {"d": d_branches, "y": y_branches, "x": x_rel, "d_unphysical": d_unphys}


def near_threshold_pair(z, params: ModelBoundParams = REFERENCE_PARAMS,
                        seed_offset: float = 1e-4, steps: int = 400):
    """The two y-roots continued from a below-threshold seed to complex z.

    Seeds at z0 = eta0 - seed_offset on the real axis where the pair is
    +-sqrt(seed_offset/2) + O(offset), then tracks the y-elimination roots
    along z0 -> z0 + i*Im z -> z."""
    eta0 = bound_state(params)["physical"].eta0
    z = complex(z)
    z0 = eta0 - seed_offset
    fam = resultant_y2(params)
    r0 = rootfind.all_roots(fam.eval_at_z(z0)).roots
    target = math.sqrt(seed_offset / 2.0)
    i_plus = int(np.argmin(np.abs(r0 - target)))
    i_minus = int(np.argmin(np.abs(r0 + target)))
    imz = max(z.imag, 1e-9)
    leg1 = [z0 + 1j * t for t in np.linspace(1e-12, imz, max(8, steps // 8))]
    leg2 = [complex(re, imz) for re in np.linspace(z0, z.real, steps)]
    path = [complex(z0)] + leg1 + leg2
    if abs(z.imag - imz) > 1e-15:
        path += [complex(z.real, t) for t in np.linspace(imz, z.imag, max(8, steps // 8))]
    res = rootfind.track(path, fam)
    return (res.trajectories[i_plus].roots[-1],
            res.trajectories[i_minus].roots[-1])


def border_curve(re_z_values, params: ModelBoundParams = REFERENCE_PARAMS,
                 im_cap: float = 4.0, tol: float = 1e-6) -> list:
    """For each Re z, the smallest Im z > 0 at which one of the two
    near-threshold roots attains Re y > 0 (bisection, tolerance ``tol``).

    Raises BracketFailure if no sign change exists for Im z in (0, im_cap].
    """
    out = []
    for rez in re_z_values:
        rez = float(rez)

        def re_y_max(im):
            pair = near_threshold_pair(complex(rez, im), params)
            return max(pair[0].real, pair[1].real)

        lo, hi = 0.0, None
        prev = tol / 4
        for im in np.geomspace(max(tol / 2, 1e-7), im_cap, 20):
            if re_y_max(im) > 0:
                hi = im
                break
            lo, prev = im, im
        if hi is None:
            raise BracketFailure(f"no Re y > 0 for Im z in (0, {im_cap}] at Re z={rez}")
        while hi - lo > tol:
            mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * hi
            if re_y_max(mid) > 0:
                hi = mid
            else:
                lo = mid
        out.append((rez, 0.5 * (lo + hi)))
    return out


# ---------------------------------------------------------------------------
# threshold theorem check at N = 2
# ---------------------------------------------------------------------------

def _sheet_resolvent(x, a, gamma):
    """Analytic continuation of the one-body matrix element to the branch's
    own sheet: the rational form evaluated at omega = i*x, with eta = -a*x^2.
    Returns (value, d/deta)."""
    w = 1j * complex(x)
    den = a * w * (w + 1j * gamma)
    R = 1.0 / den
    dR_dw = -a * (2.0 * w + 1j * gamma) / den ** 2
    dR = dR_dw / (2.0 * a * w)
    return R, dR


def mismatch_ratios(x, y, z, params: ModelBoundParams = REFERENCE_PARAMS):
    """Per-particle mismatch I/(dI/deta) for both particles; equal at
    self-consistent solutions (both give z - eta1 - eta2).

    Evaluated on each branch's own sheet (omega_i = i*x_i), so unphysical
    branches satisfy the identity too."""
    a1, a2 = float(params.a1), float(params.a2)
    g1, g2 = float(params.gamma1), float(params.gamma2)
    lam = float(params.lam)
    eta1 = -a1 * complex(x) ** 2
    eta2 = -a2 * complex(y) ** 2
    # particle 2: free; I = -R, so the ratio is R/R'
    R2, dR2 = _sheet_resolvent(y, a2, g2)
    m2 = R2 / dR2
    # particle 1: dressed; scriptI1 = -R/(1 + lam R)
    R1, dR1 = _sheet_resolvent(x, a1, g1)
    m1 = R1 * (1.0 + lam * R1) / dR1
    return m2, m1, eta1, eta2


def subtraction_relation_residual(x, y, params: ModelBoundParams = REFERENCE_PARAMS) -> complex:
    """Residual of the z-free subtraction relation
    A2 y^2 (1+y)/(1+2y) = x (A1 x (1+x) - lam)/(1+2x)
    (gamma = 1 scaling)."""
    A1, A2, lam = float(params.A1), float(params.A2), float(params.lam)
    x, y = complex(x), complex(y)
    return (A2 * y * y * (1 + y) / (1 + 2 * y)
            - x * (A1 * x * (1 + x) - lam) / (1 + 2 * x))


def n2_theorem_check(z_values, params: ModelBoundParams = REFERENCE_PARAMS) -> dict:
    """Track the physical branch toward the one-body threshold and report the
    theorem's limits: eta2 -> 0, eta1 -> eta0, vanishing and equal mismatch
    ratios, and the subtraction relation holding along the branch."""
    eta0 = bound_state(params)["physical"].eta0
    rows = []
    for z in z_values:
        z = complex(z)
        yp, ym = near_threshold_pair(z, params)
        y = yp if yp.real >= ym.real else ym
        # complete the pair through the mirrored formula x(y)
        best = None
        for x, yy, D in branch_points2(z, params):
            if abs(yy - y) < (abs(best[1] - y) if best else math.inf):
                best = (x, yy, D)
        x, y, D = best
        m2, m1, eta1, eta2 = mismatch_ratios(x, y, z, params)
        rows.append({
            "z": z, "x": x, "y": y, "D": D,
            "eta1": eta1, "eta2": eta2,
            "mismatch2": m2, "mismatch1": m1,
            "mismatch_gap": abs(m1 - m2),
            "expected_mismatch": z - eta1 - eta2,
            "subtraction_residual": abs(subtraction_relation_residual(x, y, params)),
        })
    return {"eta0": eta0, "rows": rows}
