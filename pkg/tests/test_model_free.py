"""Free-pair model: derivations vs reference forms, branch structure, grids."""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from timf import model_free as mf
from timf import oracle, rootfind
from timf.polycore import MPoly, Poly, primitive_in

UNIT = mf.UNIT_PARAMS


def _mk(vars_):
    return tuple(MPoly.var(n, vars_) for n in vars_)


def _reference_system(a1, a2, g1, g2):
    """Reference pair of stationarity polynomials."""
    V = ("x", "y", "z")
    x, y, z = _mk(V)
    E1 = 2 * a1 * x * x * y + a1 * g2 * x * x - a2 * g2 * y * y + 2 * y * z + g2 * z
    E2 = 2 * a2 * y * y * x + a2 * g1 * y * y - a1 * g1 * x * x + 2 * x * z + g1 * z
    return E1, E2


def _reference_resultant_x(a1, a2, g1, g2):
    V = ("x", "z")
    x, z = _mk(V)
    A2 = a2 * g2 ** 2
    return (2 * a1 ** 3 * g1 * x ** 7
            - a1 ** 2 * (4 * z - a1 * g1 ** 2 + a2 * g2 ** 2) * x ** 6
            - a1 * z * (8 * z - a1 * g1 ** 2 + 4 * a2 * g2 ** 2) * x ** 4
            - 2 * a1 * g1 * z * (3 * z + a2 * g2 ** 2) * x ** 3
            - z * z * (4 * z + a1 * g1 ** 2 + 4 * a2 * g2 ** 2) * x * x
            - 4 * z * z * g1 * (z + A2) * x
            - g1 ** 2 * z * z * (z + A2))


def _proportional(p: MPoly, q: MPoly) -> bool:
    """p == c*q for one nonzero rational c (exact)."""
    p, q = p.canonical(), q.canonical()
    return p == q or p == -q


PARAM_SETS = [
    (Fraction(1), Fraction(1), Fraction(1), Fraction(1)),
    (Fraction(2), Fraction(3), Fraction(1), Fraction(2)),
    (Fraction(1, 2), Fraction(5), Fraction(3), Fraction(1, 3)),
]


# ---------------------------------------------------------------------------
# packet integral
# ---------------------------------------------------------------------------

def test_lorentz_J_centered_value():
    assert mf.lorentz_J(1j, 0, 1) == pytest.approx(0.5)


def test_lorentz_J_offcenter_vs_quadrature():
    # independent oracle: direct quadrature of the packet integral
    omega, K, gamma = 1j, 1.0, 1.0

    def integrand(p):
        pr = p.real
        chi2 = gamma / (math.pi * ((pr - K) ** 2 + gamma ** 2))
        return chi2 / (pr * pr - omega * omega)

    ref = oracle.integrate_contour(integrand, [-900.0, -3.0, 0.0, 3.0, 900.0],
                                   oracle.QuadratureSpec(abs_tol=1e-11, rel_tol=1e-11))
    assert mf.lorentz_J(omega, K, gamma) == pytest.approx(ref, abs=1e-8)


def test_lorentz_J_narrow_packet_limit():
    omega = 0.3 + 0.7j
    assert mf.lorentz_J(omega, 0, 1e-9) == pytest.approx(-1 / omega ** 2, rel=1e-6)


def test_lorentz_J_pole_hit():
    with pytest.raises(mf.PoleHit):
        mf.lorentz_J(0.0, 0, 1)


# ---------------------------------------------------------------------------
# stationarity system
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("a1,a2,g1,g2", PARAM_SETS)
def test_derived_system_matches_reference(a1, a2, g1, g2):
    params = mf.ModelFreeParams(a1=a1, a2=a2, gamma1=g1, gamma2=g2)
    S1, S2 = mf.system_polys(params)
    E1, E2 = _reference_system(a1, a2, g1, g2)
    assert _proportional(S1, E1)
    assert _proportional(S2, E2)


def test_residual_zero_at_back_solved_z():
    # solve the first scaled equation for z, map back, residual vanishes
    a1, a2, g1, g2 = 2, 3, 1, 2
    params = mf.ModelFreeParams(a1=a1, a2=a2, gamma1=g1, gamma2=g2)
    A1, A2 = float(params.A1), float(params.A2)
    xp, yp = 0.37 + 0.21j, -0.55 + 0.43j
    z = (A2 * yp ** 2 - A1 * xp ** 2 * (1 + 2 * yp)) / (1 + 2 * yp)
    r1, _ = mf.system_residual(g1 * xp, g2 * yp, z, params)
    assert abs(r1) < 1e-12


def test_residual_zero_at_symmetric_bisection_root():
    f = lambda x: 2 * x ** 3 - 2 * x - 1
    lo, hi = 1.0, 1.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    r1, r2 = mf.system_residual(x, x, -1.0, UNIT)
    assert abs(r1) < 1e-6 and abs(r2) < 1e-6


def test_residual_zero_at_origin():
    assert mf.system_residual(0.0, 0.0, 0.0, UNIT) == (0, 0)


# ---------------------------------------------------------------------------
# elimination in x
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("a1,a2,g1,g2", PARAM_SETS)
def test_resultant_x_matches_reference(a1, a2, g1, g2):
    params = mf.ModelFreeParams(a1=a1, a2=a2, gamma1=g1, gamma2=g2)
    derived = mf.resultant_x(params).to_mpoly()
    reference = _reference_resultant_x(a1, a2, g1, g2)
    assert _proportional(derived, reference.lift(derived.vars))


def test_resultant_x_leading_and_constant():
    a1, a2, g1, g2 = Fraction(2), Fraction(3), Fraction(1), Fraction(2)
    params = mf.ModelFreeParams(a1=a1, a2=a2, gamma1=g1, gamma2=g2)
    bp = mf.resultant_x(params)
    lead = bp.coeffs[7].to_mpoly().canonical()
    # x^7 coefficient proportional to 2 a1^3 gamma1 (z-free)
    assert bp.coeffs[7].degree == 0
    # constant term proportional to -gamma1^2 z^2 (z + a2 gamma2^2)
    V = ("z",)
    z = MPoly.var("z", V)
    want = -(g1 ** 2) * z * z * (z + a2 * g2 ** 2)
    assert _proportional(bp.coeffs[0].to_mpoly(), want)
    # and the two carry the right relative scale: compare full polynomials
    ratio = Fraction(bp.coeffs[7].coeffs[0]) / Fraction(2 * a1 ** 3 * g1)
    got_const = [Fraction(c) / ratio for c in bp.coeffs[0].coeffs]
    assert got_const == [0, 0, -g1 ** 2 * a2 * g2 ** 2, -g1 ** 2]


def test_resultant_roots_complete_to_solutions():
    z = 2 + 1j
    roots = rootfind.all_roots(mf.resultant_x(UNIT).eval_at_z(z)).roots
    assert len(roots) == 7
    for x in roots:
        y = mf.pair_for_root(x, z, UNIT)
        r1, r2 = mf.system_residual(x, y, z, UNIT)
        assert max(abs(r1), abs(r2)) < 1e-8


# ---------------------------------------------------------------------------
# y completion
# ---------------------------------------------------------------------------

def test_y_of_x_matches_reference_formula():
    d = mf._derived_system(UNIT.key())
    V = ("x", "z")
    x, z = _mk(V)
    reference_num = -(x ** 3 + 2 * x * z + z)          # gamma2 * (a1 x^3 + 2xz + g1 z)
    reference_den = (2 * x + MPoly.const(1, V)) * (x * x + z)
    got_num = d["y_num"].lift(("x", "z")) if set(d["y_num"].vars) <= {"x", "z"} else d["y_num"]
    # cross-multiplied equality up to one scalar
    lhs = d["y_num"] * reference_den.lift(d["y_num"].vars)
    rhs = d["y_den"] * reference_num.lift(d["y_den"].vars)
    assert _proportional(lhs, rhs)


def test_y_of_x_at_origin_limit():
    # x -> 0 with z != 0 gives y -> -gamma2
    params = mf.ModelFreeParams(a1=1, a2=1, gamma1=2, gamma2=3)
    assert mf.y_of_x(1e-12, 0.7, params) == pytest.approx(-3.0, abs=1e-9)


def test_y_of_x_on_symmetric_cubic_roots():
    z = -1.0
    roots = rootfind.all_roots(np.array([z, 2 * z, 0, 2], dtype=complex)).roots
    for x in roots:
        assert mf.y_of_x(x, z, UNIT) == pytest.approx(x, abs=1e-9)


def test_y_completion_combination_identity():
    # y(x) solves the y-linear combination of the two equations identically
    # (neither single equation vanishes off the solution variety)
    rng = np.random.default_rng(7)
    S1, S2 = mf.system_polys(UNIT)
    for _ in range(10):
        x = complex(rng.normal(), rng.normal())
        z = complex(rng.normal(), rng.normal())
        try:
            y = mf.y_of_x(x, z, UNIT)
        except mf.DenominatorVanishes:
            continue
        env = {"x": x, "y": y, "z": z}
        r1 = S1.eval_complex(env)
        r2 = S2.eval_complex(env)
        combo = (1 + 2 * x) * r1 + r2  # unit parameters
        assert abs(combo) < 1e-9 * max(1.0, abs(r1), abs(r2))
        assert abs(r1) > 1e-9 or abs(x) < 1e-6  # generic points do not solve


# ---------------------------------------------------------------------------
# amplitude
# ---------------------------------------------------------------------------

def test_amplitude_relation_matches_reference():
    # alpha * D + beta proportional to the reference linear relation
    a1 = a2 = g1 = g2 = Fraction(1)
    d = mf._derived_system(UNIT.key())
    V = ("D", "x", "z")
    D, x, z = _mk(V)
    one = MPoly.const(1, V)
    lhs23 = x ** 3 * (one + x) ** 2 * (x ** 3 + z + 2 * x * z)
    rhs23 = (4 * x ** 7 * (x + one) + (one * 1 + 1 + 12 * z) * x ** 6
             + 12 * z * x ** 5 + z * (3 + 4 + 12 * z) * x ** 4
             + 2 * z * (one + 6 * z) * x ** 3 + z * z * (3 + 4 + 4 * z) * x * x
             + 4 * z * z * (one + z) * x + z * z * (one + z))
    reference = lhs23 * D - rhs23
    derived = (d["alpha"] * MPoly.var("D", d["alpha"].vars) + d["beta"])
    assert _proportional(derived, reference)


def test_amplitude_routes_agree_on_all_branches():
    z = 1 + 1j
    for bp in mf.branch_points(z, UNIT):
        assert bp.amp_mismatch < 1e-8


def test_amplitude_symmetric_branch_to_threshold():
    # D -> -2 along the symmetric branch as z -> 0, at the cube-root rate
    for z in (1e-5, 1e-7):
        roots = mf.equal_theta_solve(complex(z, 0))["symmetric"]
        scale = 3 * 2 ** (2 / 3) * z ** (1 / 3)
        assert max(abs(r + 2) for r in roots) == pytest.approx(scale, rel=0.05)


def test_amplitude_double_root_values():
    sol = mf.equal_theta_solve(Fraction(-27, 16))
    sym = sorted(sol["symmetric"], key=lambda r: r.real)
    assert sym[0] == pytest.approx(-0.2, abs=1e-12)
    assert sym[1] == pytest.approx(16.0, abs=1e-10)
    assert sym[2] == pytest.approx(16.0, abs=1e-10)


# ---------------------------------------------------------------------------
# amplitude condition (scaled)
# ---------------------------------------------------------------------------

def _reference_condition_at(z1: Fraction, z2: Fraction) -> list:
    """Reference degree-7 condition coefficients, ascending."""
    c7 = z1 ** 2 * z2 ** 2 * (z1 + 1) * (z2 + 1) * (z1 + z2 + 1)
    c6 = -4 * z1 * z2 * (z1 + 1) * (z2 + 1) * (z1 * z2 - 4 * z1 - 4 * z2 - 4)
    c5 = -4 * (3 * z1 ** 3 * z2 ** 2 + 3 * z1 ** 2 * z2 ** 3
               + 20 * z1 ** 3 * z2 + 58 * z1 ** 2 * z2 ** 2 + 20 * z1 * z2 ** 3
               + 16 * z1 ** 3 + 88 * z1 ** 2 * z2 + 88 * z1 * z2 ** 2 + 16 * z2 ** 3
               + 32 * z1 ** 2 + 84 * z1 * z2 + 32 * z2 ** 2 + 16 * (z1 + z2))
    c4 = 16 * (3 * z1 ** 2 * z2 ** 2 + 39 * (z1 ** 2 * z2 + z1 * z2 ** 2)
               + 32 * z1 ** 2 + 91 * z1 * z2 + 32 * z2 ** 2 + 48 * (z1 + z2) + 16)
    c3 = 16 * (3 * z1 ** 2 * z2 + 3 * z1 * z2 ** 2
               - (8 * z1 ** 2 + 91 * z1 * z2 + 8 * z2 ** 2) - 88 * (z1 + z2) - 64)
    c2 = 192 * (-z1 * z2 + 4 * (z1 + z2) + 8)
    c1 = -64 * (z1 + z2 + 16)
    c0 = Fraction(256)
    return [c0, c1, c2, c3, c4, c5, c6, c7]


@pytest.mark.parametrize("z1,z2", [(Fraction(1), Fraction(1)),
                                   (Fraction(2), Fraction(3)),
                                   (Fraction(1, 2), Fraction(7, 3))])
def test_amplitude_condition_numeric_matches_reference(z1, z2):
    got = mf.amplitude_condition(z1, z2)
    want = Poly("D", _reference_condition_at(z1, z2)).canonical()
    assert got == want


def test_amplitude_condition_constant_term_256():
    got = mf.amplitude_condition(Fraction(5, 7), Fraction(3))
    want = _reference_condition_at(Fraction(5, 7), Fraction(3))
    # single scalar links every coefficient, in particular the constant 256
    ratio = Fraction(got.coeffs[0]) / want[0]
    assert all(Fraction(g) == ratio * w for g, w in zip(got.coeffs, want))


def test_amplitude_condition_roots_match_branch_amplitudes():
    # at z = theta (z1 = z2 = 1) the seven branch amplitudes consist of
    # 3 symmetric values and 2 doubly-degenerate breaking values
    cond = mf.amplitude_condition(1, 1)
    cond_roots = rootfind.all_roots(cond.to_float()).roots  # Dbar = D (z = 1)
    amps = [bp.D for bp in mf.branch_points(1.0 + 0j, UNIT)]
    for a in amps:
        assert min(abs(a - r) for r in cond_roots) < 1e-6
    clustered = rootfind.multiplicity_cluster(
        rootfind.RootSet(roots=np.array(amps), residuals=np.zeros(7),
                         labels=np.arange(7)), 1e-6)
    sizes = sorted(clustered.cluster_sizes().values())
    assert sizes == [1, 1, 1, 2, 2]


# ---------------------------------------------------------------------------
# equal-parameter sector
# ---------------------------------------------------------------------------

def test_equal_theta_at_origin():
    sol = mf.equal_theta_solve(0)
    assert sol["breaking"] == [2, 2]
    assert sol["symmetric"] == [-2, -2, -2]


def test_breaking_amplitude_one_gives_z_third():
    # D = 1 lies on the breaking branch at z = 1/3: the quadratic vanishes
    brk, _, _, _ = mf.equal_theta_factors()
    val = brk.eval_complex({"D": 1.0, "z": 1.0 / 3.0})
    assert abs(val) < 1e-12
    assert mf.breaking_inverse_energy(1.0) == pytest.approx(1.0 / 3.0, abs=1e-14)


def test_breaking_inverse_on_random_energies(rng):
    for _ in range(50):
        z = complex(rng.uniform(-3, 3), rng.uniform(-2, 2))
        if abs(z) < 1e-3:
            continue
        for D in mf.equal_theta_solve(z)["breaking"]:
            assert abs(mf.breaking_inverse_energy(D) - z) < 1e-10


def test_theta_scaling_units():
    # scaled solve at (z, theta) equals unit solve at z/theta
    a = mf.equal_theta_solve(0.6 + 0.4j, theta=2.0)
    b = mf.equal_theta_solve(0.3 + 0.2j, theta=1.0)
    for key in ("breaking", "symmetric"):
        assert np.allclose(sorted(a[key], key=lambda c: (c.real, c.imag)),
                           sorted(b[key], key=lambda c: (c.real, c.imag)), atol=1e-9)


def test_symmetric_sector_degeneracy_at_equal_params():
    # 7 amplitudes: 3 symmetric plus 2 swapped pairs with equal D
    bps = mf.branch_points(0.8 + 0.5j, UNIT)
    sym = [b for b in bps if b.flags["symmetric"]]
    brk = [b for b in bps if not b.flags["symmetric"]]
    assert len(sym) == 3 and len(brk) == 4
    brkD = sorted((b.D for b in brk), key=lambda c: (c.real, c.imag))
    assert abs(brkD[0] - brkD[1]) < 1e-8
    assert abs(brkD[2] - brkD[3]) < 1e-8
    # swapped pairs: (x, y) of one appears as (y, x) of the partner
    x0, y0 = brk[0].x, brk[0].y
    partners = [b for b in brk[1:] if abs(b.x - y0) < 1e-7 and abs(b.y - x0) < 1e-7]
    assert len(partners) == 1


def test_symmetric_amplitudes_via_momentum_cubic_route():
    # the symmetric amplitudes are equally reachable by solving the
    # pseudo-momentum cubic and mapping each root through the amplitude
    # relation
    z = 0.4 + 0.7j
    cs = mf.symmetric_cubic_coeffs(z)
    xs = rootfind.all_roots(np.array(cs)).roots
    via_cubic = sorted((mf.amplitude_of_x(x, z, UNIT) for x in xs),
                       key=lambda c: (c.real, c.imag))
    direct = sorted(mf.equal_theta_solve(z)["symmetric"],
                    key=lambda c: (c.real, c.imag))
    assert np.allclose(via_cubic, direct, atol=1e-9)


def test_discriminant_sign_change_at_collision_not_threshold():
    # the cubic discriminant changes sign at z = -27/16, not at z = 0
    _, sym_D, _, _ = mf.equal_theta_factors()
    from timf.polycore import discriminant
    disc = discriminant(sym_D, "D")

    def val(zq):
        num = disc.num.subs({"z": zq}).const_value()
        den = disc.den.subs({"z": zq}).const_value()
        return Fraction(num) / Fraction(den)

    eps = Fraction(1, 1000)
    zc = Fraction(-27, 16)
    assert val(zc - eps) * val(zc + eps) < 0
    assert val(-eps) * val(eps) > 0


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_symmetric_loop_is_physical():
    # the physical loop: symmetric branch in the lower half D-plane at Im z = 1
    for t in (-3.0, -1.0, -0.3):
        bps = [b for b in mf.branch_points(complex(t, 1.0), UNIT)
               if b.flags["symmetric"]]
        phys = [b for b in bps
                if b.x.real > 0 and b.y.real > 0 and b.D.imag < 0]
        assert phys, f"no physical symmetric branch at t={t}"


def test_classify_third_symmetric_branch_fails_decay():
    bps = [b for b in mf.branch_points(-1.0 + 1.0j, UNIT) if b.flags["symmetric"]]
    third = max(bps, key=lambda b: abs(b.D))
    rep = mf.classify(third, decay_probe=[-80 + 1j, 80 + 1j])
    assert rep.decay is False
    assert not rep.physical
    # while the physical loop branch decays
    phys = [b for b in bps if b.x.real > 0 and b.D.imag < 0]
    rep2 = mf.classify(phys[0], decay_probe=[-80 + 1j, 80 + 1j])
    assert rep2.decay is True


def test_breaking_sector_never_double_positive_on_real_axis():
    brk_quartic = mf.equal_theta_factors()[2]
    for z in np.linspace(-3, 3, 121):
        if abs(z) < 1e-9:
            continue
        env = {v: 0.0 for v in brk_quartic.vars}
        env["z"] = complex(z)
        cs = [c.eval_complex(env) for c in brk_quartic.coeffs_in("x")]
        for x in rootfind.all_roots(np.array(cs)).roots:
            y = (complex(z) - x) / (x + 1.0)
            assert not (x.real > 1e-12 and y.real > 1e-12)


# ---------------------------------------------------------------------------
# grids and expansions
# ---------------------------------------------------------------------------

def test_rex_grid_values():
    field = mf.rex_product_grid(np.array([-1.0, 0.0, 0.1]), np.array([-0.5, 0.0, 0.5]))
    # z = 0: triple root at x = 0, product vanishes (cut through threshold)
    assert field.values[1, 1] == pytest.approx(0.0, abs=1e-20)
    # z = -1 real: product of real parts from the bisection-oracle root
    # r * (-r/2)^2 = r^3/4 with r the real root of 2x^3 - 2x - 1
    r = 1.1914878830656239
    assert field.values[1, 0] == pytest.approx(r ** 3 / 4, rel=1e-6)
    # conjugate z values give equal products
    assert field.values[0, 2] == pytest.approx(field.values[2, 2], rel=1e-12)


def test_zero_contour_passes_near_threshold():
    n = 33
    field = mf.rex_product_grid(np.linspace(-1, 1, n), np.linspace(-1, 1, n))
    lines = mf.zero_contour(field)
    cell = 2.0 / (n - 1)
    best = min(abs(complex(a, b)) for line in lines for a, b in line)
    assert best <= 1.5 * cell


def test_threshold_expansion_values():
    out = mf.threshold_expansions(1e-6)
    scale = 3 * 2 ** (2 / 3) * 1e-2
    sol = mf.equal_theta_solve(complex(1e-6, 0))["symmetric"]
    for r in sol:
        assert min(abs(r - d) for d in out["D"]) < 0.05 * scale
    assert any(abs(d + 2) == pytest.approx(scale, rel=1e-9) for d in out["D"])


def test_threshold_expansion_origin_and_window():
    out = mf.threshold_expansions(0)
    assert out["D"] == [-2, -2, -2]
    assert out["x"] == [0, 0, 0]
    with pytest.raises(mf.OutsideWindow):
        mf.threshold_expansions(0.5)


def test_threshold_expansion_below_threshold_x():
    z = -1e-6
    out = mf.threshold_expansions(z)
    roots = rootfind.all_roots(np.array([z, 2 * z, 0, 2], dtype=complex)).roots
    real_root = roots[np.argmin(np.abs(roots.imag))]
    target = (5e-7) ** (1 / 3)
    assert abs(real_root.real) == pytest.approx(target, rel=0.05)
    assert min(abs(real_root - x) for x in out["x"]) < 0.05 * target


# ---------------------------------------------------------------------------
# module invariants
# ---------------------------------------------------------------------------

def test_elimination_identity_random_annulus(rng):
    bp = mf.resultant_x(UNIT)
    for _ in range(20):
        r = math.exp(rng.uniform(math.log(0.1), math.log(10)))
        phi = rng.uniform(0, 2 * math.pi)
        z = r * cmath.exp(1j * phi)
        for x in rootfind.all_roots(bp.eval_at_z(z)).roots:
            y = mf.pair_for_root(x, z, UNIT)
            r1, r2 = mf.system_residual(x, y, z, UNIT)
            assert max(abs(r1), abs(r2)) < 1e-8


def test_conjugation_symmetry():
    z = 0.8 + 0.6j
    a = sorted((b.x for b in mf.branch_points(z, UNIT)), key=lambda c: (c.real, c.imag))
    b = sorted((b.x.conjugate() for b in mf.branch_points(z.conjugate(), UNIT)),
               key=lambda c: (c.real, c.imag))
    assert np.allclose(a, b, atol=1e-9)
