"""First soluble model: two free particles with Lorentzian packets.

Builds the self-consistent mean-field stationarity system in the
pseudo-momenta ``x = -i*omega_1``, ``y = -i*omega_2``, derives its elimination
polynomials exactly (degree-7 resultant in x, the linear amplitude relation,
and the degree-7 amplitude condition in the scaled variables), evaluates and
classifies solution branches, and produces threshold and grid diagnostics.

All elimination polynomials are *derived* at first use from the stationarity
conditions and cached per parameter set; reference closed forms are only used as oracles in the test suite.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import rootfind
from .polycore import (
    EXACT,
    BiPoly,
    MPoly,
    Poly,
    RatFunc,
    gcd_in_var,
    primitive_in,
    resultant,
)


class ModelError(Exception):
    pass


class PoleHit(ModelError):
    pass


class DenominatorVanishes(ModelError):
    pass


class LinearCoefficientZero(ModelError):
    """Amplitude relation lost its D term; singularity candidate."""


class OutsideWindow(ModelError):
    pass


def _fr(v) -> Fraction:
    """Exact rational from int/Fraction/str/float (floats are exact binary)."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(v).limit_denominator(10**12) if not float(v).is_integer() else Fraction(int(v))


@dataclass(frozen=True)
class ModelFreeParams:
    """Physical parameters: inverse-mass coefficients a_i, packet widths
    gamma_i, packet centers K_i.  Elimination polynomials exist for
    K_1 = K_2 = 0 only; general K enters only the closed-form packet
    integral."""

    a1: Fraction = Fraction(1)
    a2: Fraction = Fraction(1)
    gamma1: Fraction = Fraction(1)
    gamma2: Fraction = Fraction(1)
    K1: Fraction = Fraction(0)
    K2: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("a1", "a2", "gamma1", "gamma2", "K1", "K2"):
            object.__setattr__(self, name, _fr(getattr(self, name)))
        if self.a1 <= 0 or self.a2 <= 0 or self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ModelError("a_i and gamma_i must be positive")

    @property
    def A1(self) -> Fraction:
        return self.a1 * self.gamma1 ** 2

    @property
    def A2(self) -> Fraction:
        return self.a2 * self.gamma2 ** 2

    @property
    def theta(self) -> Fraction:
        if self.A1 != self.A2:
            raise ModelError("theta defined only when A1 == A2")
        return self.A1

    def key(self):
        return (self.a1, self.a2, self.gamma1, self.gamma2)

    def require_centered(self):
        if self.K1 != 0 or self.K2 != 0:
            raise ModelError("elimination polynomials require K1 = K2 = 0")


UNIT_PARAMS = ModelFreeParams()


# ---------------------------------------------------------------------------
# packet integral (closed form)
# ---------------------------------------------------------------------------

def lorentz_J(omega: complex, K=0.0, gamma=1.0) -> complex:
    """Closed-form packet integral J(omega) for the Lorentzian packet.

    For K = 0 this reduces to -1/(omega*(omega + i*gamma)).  PoleHit is
    raised within 1e-14 of a zero of the denominator.
    """
    omega = complex(omega)
    den = omega * (omega - K + 1j * gamma) * (omega + K + 1j * gamma)
    if abs(den) < 1e-14:
        raise PoleHit(f"packet integral pole at omega={omega}")
    return (-omega - 1j * gamma) / den


# ---------------------------------------------------------------------------
# exact derivation of the stationarity system and its eliminations
# ---------------------------------------------------------------------------

_SYS_VARS = ("D", "x", "y", "z")


def _mv(name):
    return MPoly.var(name, _SYS_VARS)


def _mc(c):
    return MPoly.const(c, _SYS_VARS)


def _cancel_known(num: MPoly, den: MPoly, factors) -> tuple[MPoly, MPoly]:
    """Cancel known irreducible factors shared by num and den."""
    for f in factors:
        while f.divides(num) and f.divides(den):
            num = num.div_exact(f)
            den = den.div_exact(f)
    return num, den


def _stationarity_numerator(a_self, a_other, g_self, v_self, v_other):
    """Polynomial form of one stationarity condition.

    The condition reads ``-2*a*t*J(t)/J'(t) = z + a1 x^2 + a2 y^2`` in the
    pseudo-momentum t of the differentiated particle; the packet integral is
    J(t) = 1/(t*(t+gamma)).  Returns the cleared numerator as an MPoly.
    """
    t = _mv(v_self)
    u = _mv(v_other)
    z = _mv("z")
    one = _mc(1)
    Jden = t * (t + _mc(g_self))
    J = RatFunc(one, Jden)
    dJ = J.derivative(v_self)
    lhs = RatFunc(_mc(-2 * a_self)) * RatFunc(t) * J / dJ
    rhs = z + _mc(a_self) * t * t + _mc(a_other) * u * u
    eq = lhs - RatFunc(rhs)
    # cancel the packet-pole factors shared by numerator and denominator;
    # the leftover denominator only rescales the equation and is dropped
    num, den = _cancel_known(eq.num, eq.den, [t, t + _mc(g_self), _mc(2) * t + _mc(g_self)])
    if den.degree_in(v_other) > 0 or den.degree_in("z") > 0:
        raise ModelError("stationarity denominator still couples the system")
    return num


def _sign_fix_on_z(p: MPoly) -> MPoly:
    """Canonicalize and make the pure-z coefficient positive (matching the +gamma*z
    convention of the reference forms)."""
    p = p.canonical()
    zc = p.coeffs_in("z")
    if len(zc) > 1 and not zc[1].is_zero():
        c = zc[1].const_value()
        if c is not None and c < 0:
            return (-p).canonical()
    return p


@lru_cache(maxsize=32)
def _derived_system(key):
    """Everything exact elimination needs for one parameter set.

    Returns a dict with the two system polynomials S1 (quadratic in y with a
    linear y term) and S2 (quadratic in y, no linear term), the y-completion
    rational function, the linear amplitude relation alpha*D + beta, and the
    x-resultant.
    """
    a1, a2, g1, g2 = key
    # particle-1 stationarity clears to the second system polynomial,
    # particle-2 stationarity to the first one
    S2 = _sign_fix_on_z(_stationarity_numerator(a1, a2, g1, "x", "y"))
    S1 = _sign_fix_on_z(_stationarity_numerator(a2, a1, g2, "y", "x"))

    # y-completion: solve S2 for y^2, feed the y-linear equation S1
    s2_y = S2.coeffs_in("y")
    s1_y = S1.coeffs_in("y")
    if len(s2_y) != 3 or not s2_y[1].is_zero() or len(s1_y) != 3:
        raise ModelError("unexpected y-structure in stationarity system")
    y2 = RatFunc(-s2_y[0], s2_y[2])
    # S1 = c2*y^2 + c1*y + c0  =>  y = -(c2*y2 + c0)/c1
    y_rf = -(RatFunc(s1_y[2]) * y2 + RatFunc(s1_y[0])) / RatFunc(s1_y[1])
    y_num, y_den = _cancel_known(y_rf.num, y_rf.den,
                                 [_mc(2) * _mv("x") + _mc(g1),
                                  _mc(a1) * _mv("x") ** 2 + _mv("z"),
                                  _mv("x")])

    # amplitude relation from the saddle value
    # D = (eta1 + eta2 - z) * J1 * J2 / (a1 a2), J in pseudo-momentum form
    x, y, z, D = _mv("x"), _mv("y"), _mv("z"), _mv("D")
    drel = (D * _mc(a1 * a2) * x * (x + _mc(g1)) * y * (y + _mc(g2))
            + _mc(a1) * x * x + _mc(a2) * y * y + z)
    amp = _subs_ratfunc(drel, "y", RatFunc(y_num, y_den))
    amp_c = amp.coeffs_in("D")
    alpha, beta = amp_c[1], amp_c[0]

    res_x = primitive_in(resultant(S1, S2, "y"), "x")
    return {
        "S1": S1, "S2": S2,
        "y_num": y_num, "y_den": y_den,
        "alpha": alpha, "beta": beta,
        "res_x": res_x,
    }


def _subs_ratfunc(mp: MPoly, var: str, rf: RatFunc) -> MPoly:
    """mp with ``var -> rf``, cleared by den**deg(var)."""
    cs = mp.coeffs_in(var)
    deg = len(cs) - 1
    num, den = rf.num.lift(mp.vars), rf.den.lift(mp.vars)
    out = MPoly.zero(mp.vars)
    for k, c in enumerate(cs):
        out = out + c * num ** k * den ** (deg - k)
    return out


def system_polys(params: ModelFreeParams):
    """The two derived stationarity polynomials in (x, y, z)."""
    params.require_centered()
    d = _derived_system(params.key())
    return d["S1"], d["S2"]


def system_residual(x, y, z, params: ModelFreeParams = UNIT_PARAMS):
    """Residuals (r1, r2) of the two stationarity polynomials; both vanish
    iff (x, y) solves the mean-field conditions at z."""
    S1, S2 = system_polys(params)
    env = {"x": complex(x), "y": complex(y), "z": complex(z), "D": 0.0}
    return S1.eval_complex(env), S2.eval_complex(env)


def resultant_x(params: ModelFreeParams = UNIT_PARAMS) -> BiPoly:
    """Degree-7 elimination of y from the system: polynomial in x with
    z-polynomial coefficients, content-normalized."""
    params.require_centered()
    d = _derived_system(params.key())
    mp = d["res_x"].drop_var("D").drop_var("y")
    return mp.to_bipoly("x", "z")


def resultant_y(params: ModelFreeParams = UNIT_PARAMS) -> BiPoly:
    """Mirror elimination (x removed); used for pole-collision retries."""
    params.require_centered()
    swapped = ModelFreeParams(a1=params.a2, a2=params.a1,
                              gamma1=params.gamma2, gamma2=params.gamma1)
    bp = resultant_x(swapped)
    return BiPoly("y", bp.coeffs, inner="z")


def y_of_x(x, z, params: ModelFreeParams = UNIT_PARAMS) -> complex:
    """The unique y completing a solution pair for a root x of the
    x-resultant.  DenominatorVanishes signals coincidence with the x-plane
    poles; callers retry from the mirrored elimination."""
    params.require_centered()
    d = _derived_system(params.key())
    env = {"x": complex(x), "y": 0.0, "z": complex(z), "D": 0.0}
    den = d["y_den"].eval_complex(env)
    scale = max(1.0, abs(x)) ** 3 * max(1.0, abs(z))
    if abs(den) < 1e-12 * scale:
        raise DenominatorVanishes(f"y completion denominator ~ {abs(den):.2e} at x={x}, z={z}")
    return d["y_num"].eval_complex(env) / den


def x_of_y(y, z, params: ModelFreeParams = UNIT_PARAMS) -> complex:
    """Mirrored completion formula (particle indices swapped)."""
    swapped = ModelFreeParams(a1=params.a2, a2=params.a1,
                              gamma1=params.gamma2, gamma2=params.gamma1)
    return y_of_x(y, z, swapped)


def pair_for_root(x, z, params: ModelFreeParams = UNIT_PARAMS) -> complex:
    """y partner of a resultant root, retrying through the mirrored
    elimination when the direct formula hits its pole set."""
    try:
        return y_of_x(x, z, params)
    except DenominatorVanishes:
        ys = rootfind.all_roots(resultant_y(params).eval_at_z(z)).roots
        best, best_err = None, math.inf
        for yc in ys:
            try:
                xc = x_of_y(yc, z, params)
            except DenominatorVanishes:
                continue
            err = abs(xc - x)
            if err < best_err:
                best, best_err = yc, err
        if best is None:
            raise
        return complex(best)


def amplitude_of_x(x, z, params: ModelFreeParams = UNIT_PARAMS,
                   cross_check: bool = False) -> complex:
    """Amplitude from the derived linear relation alpha(x,z)*D + beta(x,z) = 0.

    With cross_check=True the direct saddle-value route through the packet
    integrals is evaluated as well and a mismatch raises ModelError.
    """
    params.require_centered()
    d = _derived_system(params.key())
    env = {"x": complex(x), "y": 0.0, "z": complex(z), "D": 0.0}
    alpha = d["alpha"].eval_complex(env)
    beta = d["beta"].eval_complex(env)
    scale = max(1.0, abs(x)) ** 8
    if abs(alpha) < 1e-12 * scale:
        raise LinearCoefficientZero(f"amplitude relation degenerate at x={x}, z={z}")
    D = -beta / alpha
    if cross_check:
        y = pair_for_root(x, z, params)
        D2 = amplitude_direct(x, y, z, params)
        if abs(D - D2) > 1e-8 * max(1.0, abs(D)):
            raise ModelError(f"amplitude routes disagree: {D} vs {D2}")
    return D


def amplitude_direct(x, y, z, params: ModelFreeParams = UNIT_PARAMS) -> complex:
    """Saddle value D = (eta1 + eta2 - z) J1 J2 / (a1 a2) evaluated through
    the closed-form packet integrals (the independent route)."""
    a1, a2 = float(params.a1), float(params.a2)
    g1, g2 = float(params.gamma1), float(params.gamma2)
    w1, w2 = 1j * complex(x), 1j * complex(y)
    J1 = lorentz_J(w1, float(params.K1), g1)
    J2 = lorentz_J(w2, float(params.K2), g2)
    eta1 = a1 * w1 ** 2
    eta2 = a2 * w2 ** 2
    return (eta1 + eta2 - complex(z)) * J1 * J2 / (a1 * a2)


# ---------------------------------------------------------------------------
# amplitude condition in scaled variables
# ---------------------------------------------------------------------------

_COND_VARS = ("D", "x", "z1", "z2")


@lru_cache(maxsize=1)
def amplitude_condition_symbolic() -> MPoly:
    """Degree-7 condition relating the scaled amplitude and energy, derived
    symbolically in (z1, z2) = (A1/z, A2/z) with Dbar = D*z.

    Derivation runs at z = 1, gamma_i = 1, a_i = z_i, where the scaled
    variables coincide with the bare ones.  Returned raw: the Sylvester
    construction leaves a Dbar-free content polynomial in (z1, z2) which the
    comparison tests peel off by exact division.
    """
    V = _COND_VARS
    D, x, z1, z2 = (MPoly.var(n, V) for n in V)
    one = MPoly.const(1, V)
    y = MPoly.var("y", V + ("y",))
    xl, z1l, z2l, onel = (p.lift(V + ("y",)) for p in (x, z1, z2, one))
    S1 = 2 * z1l * xl * xl * y + z1l * xl * xl - z2l * y * y + 2 * y + onel
    S2 = 2 * z2l * y * y * xl + z2l * y * y - z1l * xl * xl + 2 * xl + onel
    R = resultant(S1, S2, "y").drop_var("y")
    N = -(z1 * x ** 3 + 2 * x + one)
    M = (2 * x + one) * (z1 * x * x + one)
    amp = (D * z1 * z2 * x * (x + one) * N * (N + M)
           + M * M * (z1 * x * x + one) + z2 * N * N)
    C = resultant(R.lift(V), amp, "x").drop_var("x")
    return C


def amplitude_condition(z1, z2) -> Poly:
    """Degree-7 condition at numeric (z1, z2), exact coefficients,
    content-1 normalized, in the scaled amplitude variable."""
    z1, z2 = _fr(z1), _fr(z2)
    V = ("D", "x")
    D, x = (MPoly.var(n, V) for n in V)
    one = MPoly.const(1, V)
    y = MPoly.var("y", V + ("y",))
    Dl, xl, onel = (p.lift(V + ("y",)) for p in (D, x, one))
    c1, c2 = MPoly.const(z1, V + ("y",)), MPoly.const(z2, V + ("y",))
    S1 = 2 * c1 * xl * xl * y + c1 * xl * xl - c2 * y * y + 2 * y + onel
    S2 = 2 * c2 * y * y * xl + c2 * y * y - c1 * xl * xl + 2 * xl + onel
    R = resultant(S1, S2, "y").drop_var("y")
    z1c, z2c = MPoly.const(z1, V), MPoly.const(z2, V)
    N = -(z1c * x ** 3 + 2 * x + one)
    M = (2 * x + one) * (z1c * x * x + one)
    amp = (D * z1c * z2c * x * (x + one) * N * (N + M)
           + M * M * (z1c * x * x + one) + z2c * N * N)
    C = resultant(R, amp, "x").drop_var("x")
    return C.canonical().to_poly("D")


# ---------------------------------------------------------------------------
# equal-parameter (theta) sector
# ---------------------------------------------------------------------------

_THETA_VARS = ("D", "x", "z")


@lru_cache(maxsize=1)
def equal_theta_factors():
    """Derived factor polynomials of the equal-parameter condition, in units
    where theta scales z and 1/theta scales D.

    Returns (breaking_quadratic, symmetric_cubic, breaking_quartic_x,
    symmetric_cubic_x), each an MPoly in (D, x, z) normalized to content 1.
    """
    d = _derived_system(UNIT_PARAMS.key())
    S1, S2 = d["S1"], d["S2"]
    # symmetric sector: x = y
    sym_x = _subs_ratfunc(S1, "y", RatFunc(_mv("x"))).canonical()
    res_x = d["res_x"]
    brk_x = res_x.div_exact(sym_x.lift(res_x.vars) * _mc(1).lift(res_x.vars)).canonical()
    amp = d["alpha"] * _mv("D") + d["beta"]
    sym_D = primitive_in(resultant(sym_x, amp, "x").drop_var("x").drop_var("y"), "D")
    brk_quartic_D = primitive_in(resultant(brk_x, amp, "x").drop_var("x").drop_var("y"), "D")
    # the quartic is a perfect square: pull the repeated factor by gcd with
    # its D-derivative
    brk_D = primitive_in(gcd_in_var(brk_quartic_D, brk_quartic_D.derivative("D"), "D"), "D")
    return brk_D, sym_D, brk_x, sym_x


def symmetric_cubic_coeffs(z, params: ModelFreeParams = UNIT_PARAMS):
    """Ascending coefficients of the symmetric-sector pseudo-momentum cubic
    at numeric z (2x^3 + 2xz + z for unit parameters)."""
    d = _derived_system(params.key())
    sym = _subs_ratfunc(d["S1"], "y", RatFunc(_mv("x"))).canonical()
    cs = sym.coeffs_in("x")
    return [c.eval_complex({"z": complex(z), "D": 0.0, "y": 0.0}) for c in cs]


def equal_theta_solve(z, theta=1):
    """Roots of the two equal-parameter factors at scaled energy z/theta.

    Returns {"breaking": [...2 roots...], "symmetric": [...3 roots...]} in
    units of 1/theta for the amplitude.  Exact z (int/Fraction) takes the
    exact multiplicity path, so multiple roots come out exact.
    """
    brk_D, sym_D, _, _ = equal_theta_factors()
    exact_input = isinstance(z, (int, Fraction)) and isinstance(theta, (int, Fraction))
    zs = Fraction(z) / Fraction(theta) if exact_input else complex(z) / complex(theta)
    out = {}
    for name, mp in (("breaking", brk_D), ("symmetric", sym_D)):
        if exact_input:
            p = mp.subs({"z": zs}).to_poly("D")
            roots = []
            for r, m in rootfind.exact_multiplicity_roots(p):
                roots.extend([r] * m)
        else:
            env = {v: 0.0 for v in mp.vars}
            env["z"] = zs
            cs = [c.eval_complex(env) for c in mp.coeffs_in("D")]
            roots = sorted(rootfind.all_roots(np.array(cs)).roots,
                           key=lambda r: (r.real, r.imag))
        out[name] = [complex(r) for r in roots]
    return out


def breaking_inverse_energy(D) -> complex:
    """Rational inverse on the symmetry-breaking sector:
    z = (D-2)^2 / (D*(4-D)) in theta units."""
    D = complex(D)
    return (D - 2) ** 2 / (D * (4 - D))


# ---------------------------------------------------------------------------
# branch points and classification
# ---------------------------------------------------------------------------

@dataclass
class BranchPoint:
    """One self-consistent solution at complex energy z."""

    z: complex
    x: complex
    y: complex
    D: complex
    eta1: complex
    eta2: complex
    residual: float
    amp_mismatch: float
    flags: dict = field(default_factory=dict)

    @property
    def symmetric(self) -> bool:
        return bool(self.flags.get("symmetric", False))


def branch_points(z, params: ModelFreeParams = UNIT_PARAMS, sym_tol=1e-8) -> list[BranchPoint]:
    """All seven solution branches at numeric z, with both amplitude routes
    cross-checked."""
    z = complex(z)
    rx = resultant_x(params)
    roots = rootfind.all_roots(rx.eval_at_z(z)).roots
    a1, a2 = float(params.a1), float(params.a2)
    out = []
    for x in roots:
        y = pair_for_root(x, z, params)
        r1, r2 = system_residual(x, y, z, params)
        D = amplitude_of_x(x, z, params)
        D2 = amplitude_direct(x, y, z, params)
        bp = BranchPoint(
            z=z, x=complex(x), y=complex(y), D=D,
            eta1=-a1 * complex(x) ** 2, eta2=-a2 * complex(y) ** 2,
            residual=max(abs(r1), abs(r2)),
            amp_mismatch=abs(D - D2) / max(1.0, abs(D)),
            flags={},
        )
        bp.flags = point_flags(bp)
        bp.flags["symmetric"] = abs(bp.x - bp.y) <= sym_tol * max(1.0, abs(bp.x))
        out.append(bp)
    return out


def point_flags(bp: BranchPoint) -> dict:
    """Pointwise physicality flags."""
    flags = {
        "re_x_pos": bp.x.real > 0,
        "re_y_pos": bp.y.real > 0,
    }
    if bp.z.imag > 0:
        flags["im_D_neg"] = bp.D.imag < 0
    if bp.z.imag == 0 and bp.z.real < 0:
        flags["re_D_neg"] = bp.D.real < 0
    return flags


@dataclass
class PhysicalityReport:
    flags: dict
    decay: bool | None
    physical: bool


def classify(bp: BranchPoint, decay_probe=None,
             params: ModelFreeParams = UNIT_PARAMS) -> PhysicalityReport:
    """Physicality report for one branch point.

    With ``decay_probe`` (a list of large-|z| values) the branch is tracked
    from bp.z to each probe and the amplitude must shrink toward zero.
    """
    flags = point_flags(bp)
    decay = None
    if decay_probe:
        decay = True
        rx = resultant_x(params)
        for z_far in decay_probe:
            # geometric spacing keeps per-step displacements proportional to
            # the root scale, so the tracker rarely needs to subdivide
            ts = np.concatenate(([0.0], np.geomspace(0.01, 1.0, 25)))
            zs = [bp.z + t * (complex(z_far) - bp.z) for t in ts]
            res = rootfind.track(zs, rx, seed_roots=None)
            starts = [t.roots[0] for t in res.trajectories]
            i = int(np.argmin([abs(s - bp.x) for s in starts]))
            x_far = res.trajectories[i].roots[-1]
            try:
                D_far = amplitude_of_x(x_far, complex(z_far), params)
            except LinearCoefficientZero:
                decay = False
                continue
            if not (abs(D_far) < 0.25 * max(1.0, abs(bp.D))):
                decay = False
    physical = all(flags.values()) and (decay is not False)
    return PhysicalityReport(flags=flags, decay=decay, physical=physical)


# ---------------------------------------------------------------------------
# grids and threshold expansions
# ---------------------------------------------------------------------------

@dataclass
class GridField:
    """Rectangular complex-z grid of one scalar diagnostic."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray  # shape (len(im_axis), len(re_axis))
    kind: str
    meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": self.kind,
            "re_axis": [float(v) for v in self.re_axis],
            "im_axis": [float(v) for v in self.im_axis],
            "values": [[float(v) for v in row] for row in self.values],
            "meta": self.meta,
        }


def rex_product_grid(re_axis, im_axis, params: ModelFreeParams = UNIT_PARAMS,
                     sector: str = "symmetric") -> GridField:
    """Product of the real parts of the sector roots over a z-grid.

    symmetric: the 3 roots of the symmetric pseudo-momentum cubic;
    breaking: the 4 roots of the symmetry-breaking quartic.  The zero
    contour of this product is the reported cut.
    """
    re_axis = np.asarray(re_axis, float)
    im_axis = np.asarray(im_axis, float)
    if sector == "symmetric":
        mp = equal_theta_factors()[3]
    elif sector == "breaking":
        mp = equal_theta_factors()[2]
    else:
        raise ModelError(f"unknown sector {sector!r}")
    coeffs = mp.coeffs_in("x")
    vals = np.empty((len(im_axis), len(re_axis)))
    for i, b in enumerate(im_axis):
        for j, a in enumerate(re_axis):
            z = complex(a, b)
            env = {v: 0.0 for v in mp.vars}
            env["z"] = z
            cs = np.array([c.eval_complex(env) for c in coeffs])
            roots = rootfind.all_roots(cs).roots
            vals[i, j] = float(np.prod(roots.real))
    return GridField(re_axis=re_axis, im_axis=im_axis, values=vals,
                     kind=f"re_x_product_{sector}",
                     meta={"sector": sector})


def zero_contour(field: GridField) -> list[list[tuple[float, float]]]:
    """Zero level set of the grid as polylines (marching squares, linear
    interpolation along cell edges, deterministic ordering)."""
    segs = []
    v = field.values
    re, im = field.re_axis, field.im_axis

    def interp(p0, p1, v0, v1):
        t = v0 / (v0 - v1)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    for i in range(len(im) - 1):
        for j in range(len(re) - 1):
            corners = [
                ((re[j], im[i]), v[i, j]),
                ((re[j + 1], im[i]), v[i, j + 1]),
                ((re[j + 1], im[i + 1]), v[i + 1, j + 1]),
                ((re[j], im[i + 1]), v[i + 1, j]),
            ]
            pts = []
            for k in range(4):
                (p0, v0), (p1, v1) = corners[k], corners[(k + 1) % 4]
                if v0 == 0.0:
                    pts.append(p0)
                elif (v0 < 0) != (v1 < 0):
                    pts.append(interp(p0, p1, v0, v1))
            pts = sorted(set(pts))
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
    # chain segments into polylines
    polylines: list[list[tuple[float, float]]] = []
    used = [False] * len(segs)
    for s in range(len(segs)):
        if used[s]:
            continue
        used[s] = True
        line = [segs[s][0], segs[s][1]]
        grew = True
        while grew:
            grew = False
            for t in range(len(segs)):
                if used[t]:
                    continue
                a, b = segs[t]
                if _close(line[-1], a):
                    line.append(b)
                elif _close(line[-1], b):
                    line.append(a)
                elif _close(line[0], a):
                    line.insert(0, b)
                elif _close(line[0], b):
                    line.insert(0, a)
                else:
                    continue
                used[t] = True
                grew = True
        polylines.append(line)
    return polylines


def _close(p, q, tol=1e-12):
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


_CUBE_J = (1.0, complex(-0.5, math.sqrt(3) / 2), complex(-0.5, -math.sqrt(3) / 2))


def threshold_expansions(z) -> dict:
    """Leading-order branch predictions near the two-body threshold:
    D = -2 - j*3*2**(2/3)*z**(1/3) and x = j*(-z/2)**(1/3) over the three
    cube-root branches j.  Valid for |z| <= 0.01."""
    z = complex(z)
    if abs(z) > 0.01:
        raise OutsideWindow(f"|z|={abs(z):.3g} outside the 0.01 expansion window")
    zc = z ** (1.0 / 3.0) if z != 0 else 0.0
    xc = (-z / 2.0) ** (1.0 / 3.0) if z != 0 else 0.0
    Ds = [-2.0 - j * (2.0 ** (2.0 / 3.0)) * 3.0 * zc for j in _CUBE_J]
    xs = [j * xc for j in _CUBE_J]
    return {"D": Ds, "x": xs}
