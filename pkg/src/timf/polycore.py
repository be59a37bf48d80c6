"""Exact and floating polynomial arithmetic.

Dense univariate polynomials (:class:`Poly`), univariate-in-outer-variable
polynomials with polynomial-in-z coefficients (:class:`BiPoly`), and a sparse
multivariate engine (:class:`MPoly`) that powers Sylvester resultants and
discriminants.  Every elimination polynomial used by the model modules is
*derived* through this engine rather than transcribed.

Exact mode works over Gaussian rationals (pairs of :class:`fractions.Fraction`);
float mode over complex doubles.  Resultants are Sylvester determinants
computed by fraction-free Bareiss elimination, so integer inputs stay integer
throughout.  Resultants and discriminants are only defined up to the
conventions documented on each function; comparisons against reference
polynomials are made after normalizing to content 1 with a positive-real
leading coefficient.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import gcd as _int_gcd

__all__ = [
    "EXACT",
    "FLOAT",
    "QQi",
    "Poly",
    "BiPoly",
    "MPoly",
    "RatFunc",
    "poly_eval",
    "resultant",
    "discriminant",
    "sylvester_matrix",
    "det_bareiss",
    "gcd_univar",
    "content_in",
    "primitive_in",
    "gcd_in_var",
    "PolycoreError",
    "ModeMismatch",
    "DegreeZero",
    "DegreeTooLow",
    "ExactDivisionError",
]

EXACT = "exact"
FLOAT = "float"


class PolycoreError(Exception):
    pass


class ModeMismatch(PolycoreError):
    """Operands mix exact and float modes where that loses exactness."""


class DegreeZero(PolycoreError):
    """An input does not contain the variable being eliminated."""


class DegreeTooLow(PolycoreError):
    """Discriminant requested for degree < 2."""


class ExactDivisionError(PolycoreError):
    """Exact division left a nonzero remainder."""


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

class QQi:
    """Gaussian rational a + b*i with exact Fraction components.

    Closed under +, -, *, and / by nonzero.  Mixed arithmetic with int and
    Fraction promotes the other operand.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __repr__(self):
        return f"QQi({self.re!s}, {self.im!s})"

    def __eq__(self, other):
        other = _as_qqi(other)
        if other is None:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __add__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        return QQi(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        return QQi(self.re * o.re - self.im * o.im,
                   self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero QQi")
        return QQi((self.re * o.re + self.im * o.im) / n,
                   (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = _as_qqi(other)
        if o is None:
            return NotImplemented
        return o / self

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return QQi(self.re, -self.im)


def _as_qqi(v):
    if isinstance(v, QQi):
        return v
    if isinstance(v, (int, Fraction)):
        return QQi(v, 0)
    return None


def is_exact_scalar(v) -> bool:
    return isinstance(v, (int, Fraction, QQi))


def _demote(v):
    """Drop a scalar to the smallest exact representation."""
    if isinstance(v, QQi):
        if v.im == 0:
            v = v.re
        else:
            return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _scalar_zero(v) -> bool:
    if isinstance(v, complex):
        return v == 0.0
    return not v


def _div_exact_scalar(a, b):
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise ExactDivisionError(f"{a} not divisible by {b}")
        return q
    if isinstance(a, complex) or isinstance(b, complex):
        return a / b
    return _demote(_promote_frac(a) / _promote_frac(b))


def _promote_frac(v):
    if isinstance(v, int):
        return Fraction(v)
    return v


def _to_complex(v):
    if isinstance(v, QQi):
        return complex(v)
    return complex(v)


# ---------------------------------------------------------------------------
# multivariate sparse polynomials, packed exponent keys
# ---------------------------------------------------------------------------

_SHIFT = 16
_MASK = (1 << _SHIFT) - 1

# preferred variable ordering inside packed keys (position 0 = lowest bits)
_VAR_PRIORITY = {"D": 0, "d": 1, "x": 2, "y": 3, "z": 4, "z1": 5, "z2": 6, "q": 7}


def _order_vars(names):
    return tuple(sorted(set(names), key=lambda n: (_VAR_PRIORITY.get(n, 99), n)))


class MPoly:
    """Sparse multivariate polynomial with packed integer exponent keys.

    ``terms`` maps a packed key (16 bits per variable, low bits = first
    variable of ``vars``) to a scalar coefficient: int, Fraction, QQi, or
    complex.  Integer coefficients are kept integer wherever possible so that
    Bareiss elimination runs fraction-free.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars, terms=None, _clean=True):
        self.vars = tuple(vars)
        if terms is None:
            terms = {}
        if _clean:
            terms = {k: _demote(v) for k, v in terms.items() if not _scalar_zero(v)}
        self.terms = terms

    # -- constructors

    @classmethod
    def zero(cls, vars=()):
        return cls(vars, {})

    @classmethod
    def const(cls, c, vars=()):
        if _scalar_zero(c):
            return cls(vars, {})
        return cls(vars, {0: _demote(c)}, _clean=False)

    @classmethod
    def var(cls, name, vars=None):
        if vars is None:
            vars = (name,)
        vars = tuple(vars)
        i = vars.index(name)
        return cls(vars, {1 << (_SHIFT * i): 1}, _clean=False)

    @classmethod
    def from_dict(cls, vars, exp_coeffs):
        """Build from {(e0, e1, ...): coeff} with exponents in vars order."""
        vars = tuple(vars)
        terms = {}
        for exps, c in exp_coeffs.items():
            k = 0
            for i, e in enumerate(exps):
                k |= e << (_SHIFT * i)
            terms[k] = c
        return cls(vars, terms)

    # -- introspection

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and 0 in self.terms)

    def const_value(self):
        if not self.terms:
            return 0
        return self.terms.get(0, 0) if self.is_const() else None

    @property
    def mode(self) -> str:
        return FLOAT if any(isinstance(v, complex) for v in self.terms.values()) else EXACT

    def exponents(self, key):
        return tuple((key >> (_SHIFT * i)) & _MASK for i in range(len(self.vars)))

    def degree_in(self, name) -> int:
        if name not in self.vars:
            return 0 if self.terms else -1
        i = self.vars.index(name)
        sh = _SHIFT * i
        return max(((k >> sh) & _MASK for k in self.terms), default=-1)

    def total_degree(self) -> int:
        best = -1
        for k in self.terms:
            best = max(best, sum(self.exponents(k)))
        return best

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        a, b = align(self, other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.vars, tuple(sorted(self.terms.items(), key=lambda t: t[0]))))

    def __repr__(self):
        if not self.terms:
            return "MPoly(0)"
        parts = []
        for k in sorted(self.terms, reverse=True):
            mono = "*".join(f"{v}^{e}" if e > 1 else v
                            for v, e in zip(self.vars, self.exponents(k)) if e)
            c = self.terms[k]
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "MPoly(" + " + ".join(parts[:12]) + (" + ..." if len(parts) > 12 else "") + ")"

    # -- ring operations (operands must share the vars tuple; use align())

    def __add__(self, other):
        if isinstance(other, (int, Fraction, QQi, complex)):
            other = MPoly.const(other, self.vars)
        a, b = align(self, other)
        r = dict(a.terms)
        for k, v in b.terms.items():
            nv = r.get(k, 0) + v
            if _scalar_zero(nv):
                r.pop(k, None)
            else:
                r[k] = nv
        return MPoly(a.vars, r, _clean=False)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.vars, {k: -v for k, v in self.terms.items()}, _clean=False)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, QQi, complex)):
            other = MPoly.const(other, self.vars)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QQi, complex)):
            if _scalar_zero(other):
                return MPoly(self.vars, {})
            return MPoly(self.vars, {k: v * other for k, v in self.terms.items()})
        a, b = align(self, other)
        ta, tb = a.terms, b.terms
        if len(ta) > len(tb):
            ta, tb = tb, ta
        r = {}
        get = r.get
        for ka, va in ta.items():
            for kb, vb in tb.items():
                k = ka + kb
                nv = get(k, 0) + va * vb
                if _scalar_zero(nv):
                    if k in r:
                        del r[k]
                else:
                    r[k] = nv
        return MPoly(a.vars, r, _clean=False)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = MPoly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    # -- calculus and evaluation

    def derivative(self, name) -> "MPoly":
        i = self.vars.index(name)
        sh = _SHIFT * i
        r = {}
        for k, v in self.terms.items():
            e = (k >> sh) & _MASK
            if e:
                r[k - (1 << sh)] = r.get(k - (1 << sh), 0) + v * e
        return MPoly(self.vars, r)

    def subs(self, assignment) -> "MPoly":
        """Substitute exact scalars for some variables; stays exact."""
        keep = [v for v in self.vars if v not in assignment]
        out = {}
        for k, v in self.terms.items():
            exps = self.exponents(k)
            c = v
            nk = 0
            for j, (name, e) in enumerate(zip(self.vars, exps)):
                if name in assignment:
                    if e:
                        c = c * assignment[name] ** e
                else:
                    nk |= e << (_SHIFT * keep.index(name))
            nv = out.get(nk, 0) + c
            if _scalar_zero(nv):
                out.pop(nk, None)
            else:
                out[nk] = nv
        return MPoly(tuple(keep), out)

    def eval_complex(self, assignment) -> complex:
        """Evaluate with complex values; variables the polynomial does not
        actually use may be omitted from the assignment."""
        total = 0j
        vals = []
        for v in self.vars:
            if v in assignment:
                vals.append(complex(assignment[v]))
            elif self.degree_in(v) <= 0:
                vals.append(0j)
            else:
                raise KeyError(f"missing value for {v!r}")
        for k, v in self.terms.items():
            t = _to_complex(v)
            for i, e in enumerate(self.exponents(k)):
                if e:
                    t *= vals[i] ** e
            total += t
        return total

    # -- structure by one variable

    def coeffs_in(self, name):
        """Dense coefficient list in ``name``: index = power, entries MPoly
        over the same vars with that exponent zeroed."""
        i = self.vars.index(name)
        sh = _SHIFT * i
        d = self.degree_in(name)
        if d < 0:
            return []
        cs = [dict() for _ in range(d + 1)]
        for k, v in self.terms.items():
            e = (k >> sh) & _MASK
            cs[e][k - (e << sh)] = v
        return [MPoly(self.vars, c, _clean=False) for c in cs]

    def leading_in(self, name) -> "MPoly":
        cs = self.coeffs_in(name)
        return cs[-1] if cs else MPoly(self.vars, {})

    def drop_var(self, name) -> "MPoly":
        """Remove a variable the polynomial no longer uses."""
        if self.degree_in(name) > 0:
            raise ValueError(f"polynomial still depends on {name}")
        i = self.vars.index(name)
        keep = self.vars[:i] + self.vars[i + 1:]
        out = {}
        for k, v in self.terms.items():
            exps = list(self.exponents(k))
            del exps[i]
            nk = 0
            for j, e in enumerate(exps):
                nk |= e << (_SHIFT * j)
            out[nk] = v
        return MPoly(keep, out, _clean=False)

    # -- exact division

    def div_exact(self, other) -> "MPoly":
        """Exact multivariate division; raises ExactDivisionError otherwise."""
        if isinstance(other, (int, Fraction, QQi, complex)):
            other = MPoly.const(other, self.vars)
        a, b = align(self, other)
        if not b.terms:
            raise ZeroDivisionError("division by zero polynomial")
        rem = dict(a.terms)
        q = {}
        bkey = max(b.terms)
        bexp = b.exponents(bkey)
        blead = b.terms[bkey]
        nv_ = len(a.vars)
        while rem:
            rkey = max(rem)
            rexp = tuple((rkey >> (_SHIFT * i)) & _MASK for i in range(nv_))
            if any(re_ < be_ for re_, be_ in zip(rexp, bexp)):
                raise ExactDivisionError("leading monomial not divisible")
            ke = rkey - bkey
            c = _div_exact_scalar(rem[rkey], blead)
            q[ke] = q.get(ke, 0) + c
            get = rem.get
            for kb, vb in b.terms.items():
                k = ke + kb
                nvv = get(k, 0) - c * vb
                if _scalar_zero(nvv):
                    rem.pop(k, None)
                else:
                    rem[k] = nvv
        return MPoly(a.vars, q)

    def divides(self, other) -> bool:
        try:
            other.div_exact(self)
            return True
        except (ExactDivisionError, ZeroDivisionError):
            return False

    # -- normalization

    def rational_content(self):
        """Content over Q: gcd of numerators / lcm of denominators (exact
        coefficients only); returns a Fraction > 0."""
        num_gcd = 0
        den_lcm = 1
        for v in self.terms.values():
            if isinstance(v, QQi):
                cands = [v.re, v.im]
            else:
                cands = [_promote_frac(v)]
            for f in cands:
                if f == 0:
                    continue
                num_gcd = _int_gcd(num_gcd, abs(f.numerator))
                den_lcm = den_lcm * f.denominator // _int_gcd(den_lcm, f.denominator)
        if num_gcd == 0:
            return Fraction(1)
        return Fraction(num_gcd, den_lcm)

    def canonical(self) -> "MPoly":
        """Scale to rational content 1 and positive-real leading coefficient
        (largest packed key).  Exact mode only."""
        if not self.terms:
            return self
        if self.mode == FLOAT:
            raise ModeMismatch("canonical() requires exact coefficients")
        c = self.rational_content()
        lead = self.terms[max(self.terms)]
        lead = _promote_frac(lead) if not isinstance(lead, QQi) else lead
        if isinstance(lead, QQi):
            sgn = 1 if (lead.re > 0 or (lead.re == 0 and lead.im > 0)) else -1
        else:
            sgn = 1 if lead > 0 else -1
        scale = Fraction(sgn) / c
        return MPoly(self.vars, {k: _demote(_promote_frac(v) * scale if not isinstance(v, QQi) else v * scale)
                                 for k, v in self.terms.items()}, _clean=False)

    def to_float(self) -> "MPoly":
        return MPoly(self.vars, {k: _to_complex(v) for k, v in self.terms.items()})

    # -- conversions

    def to_poly(self, name) -> "Poly":
        for v in self.vars:
            if v != name and self.degree_in(v) > 0:
                raise ValueError(f"not univariate: still depends on {v}")
        d = self.degree_in(name)
        coeffs = [0] * (d + 1) if d >= 0 else []
        i = self.vars.index(name) if name in self.vars else None
        for k, v in self.terms.items():
            e = 0 if i is None else (k >> (_SHIFT * i)) & _MASK
            coeffs[e] = v
        return Poly(name, coeffs)

    def to_bipoly(self, outer, inner) -> "BiPoly":
        cs = self.coeffs_in(outer)
        inner_polys = []
        for c in cs:
            inner_polys.append(c.to_poly(inner))
        return BiPoly(outer, inner_polys, inner=inner)


def align(a: MPoly, b: MPoly):
    """Bring two MPolys onto a shared variable tuple."""
    if a.vars == b.vars:
        return a, b
    union = _order_vars(a.vars + b.vars)
    return a.lift(union), b.lift(union)


def _lift(self: MPoly, new_vars):
    new_vars = tuple(new_vars)
    if self.vars == new_vars:
        return self
    pos = []
    for v in self.vars:
        pos.append(new_vars.index(v))
    out = {}
    for k, v in self.terms.items():
        nk = 0
        for i, p in enumerate(pos):
            nk |= ((k >> (_SHIFT * i)) & _MASK) << (_SHIFT * p)
        out[nk] = v
    return MPoly(new_vars, out, _clean=False)


MPoly.lift = _lift


# ---------------------------------------------------------------------------
# dense univariate / bivariate containers
# ---------------------------------------------------------------------------

class Poly:
    """Dense univariate polynomial; index = power, trailing zeros trimmed.

    Coefficients are exact scalars (int / Fraction / QQi) in exact mode or
    complex doubles in float mode; the mode is uniform per polynomial.
    """

    __slots__ = ("var", "coeffs")

    def __init__(self, var, coeffs):
        self.var = var
        cs = list(coeffs)
        has_float = any(isinstance(c, (complex, float)) for c in cs)
        if has_float:
            cs = [complex(c) if not isinstance(c, QQi) else complex(c) for c in cs]
        else:
            cs = [_demote(c) for c in cs]
        while cs and _scalar_zero(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @property
    def mode(self) -> str:
        return FLOAT if any(isinstance(c, complex) for c in self.coeffs) else EXACT

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def lc(self):
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.var == other.var and self.coeffs == other.coeffs

    def __repr__(self):
        return f"Poly({self.var!r}, {self.coeffs!r})"

    def __call__(self, v):
        return poly_eval(self, v)

    def __add__(self, other):
        if not isinstance(other, Poly) or other.var != self.var:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + [0] * (n - len(self.coeffs))
        b = other.coeffs + [0] * (n - len(other.coeffs))
        return Poly(self.var, [x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QQi, complex, float)):
            return Poly(self.var, [c * other for c in self.coeffs])
        if not isinstance(other, Poly) or other.var != self.var:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Poly(self.var, [])
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(self.var, out)

    __rmul__ = __mul__

    def derivative(self) -> "Poly":
        return Poly(self.var, [c * k for k, c in enumerate(self.coeffs)][1:])

    def to_float(self) -> "Poly":
        return Poly(self.var, [_to_complex(c) for c in self.coeffs])

    def as_array(self):
        import numpy as np
        return np.array([_to_complex(c) for c in self.coeffs], dtype=complex)

    def to_mpoly(self, vars=None) -> MPoly:
        if vars is None:
            vars = (self.var,)
        mp = MPoly.zero(vars)
        i = vars.index(self.var)
        terms = {}
        for e, c in enumerate(self.coeffs):
            if not _scalar_zero(c):
                terms[e << (_SHIFT * i)] = c
        return MPoly(vars, terms, _clean=False)

    def canonical(self) -> "Poly":
        return self.to_mpoly().canonical().to_poly(self.var)

    # JSON wire format:
    #   exact: {"variable": v, "mode": "exact",
    #           "coefficients": [[re_num, re_den, im_num, im_den], ...]}
    #   float: {"variable": v, "mode": "float", "coefficients": [[re, im], ...]}
    def to_json_dict(self) -> dict:
        if self.mode == EXACT:
            cs = []
            for c in self.coeffs:
                q = c if isinstance(c, QQi) else QQi(c)
                cs.append([q.re.numerator, q.re.denominator,
                           q.im.numerator, q.im.denominator])
            return {"variable": self.var, "mode": EXACT, "coefficients": cs}
        return {"variable": self.var, "mode": FLOAT,
                "coefficients": [[c.real, c.imag] for c in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d) -> "Poly":
        if d["mode"] == EXACT:
            coeffs = [QQi(Fraction(rn, rd), Fraction(imn, imd))
                      for rn, rd, imn, imd in d["coefficients"]]
        else:
            coeffs = [complex(re, im) for re, im in d["coefficients"]]
        return cls(d["variable"], coeffs)

    @classmethod
    def from_json(cls, s) -> "Poly":
        return cls.from_json_dict(json.loads(s))


def poly_eval(p: Poly, v):
    """Horner evaluation.  Exact-mode polynomials require an exact scalar v."""
    if not p.coeffs:
        return 0j if isinstance(v, (complex, float)) else 0
    if p.mode == EXACT:
        if isinstance(v, (complex, float)) and not isinstance(v, int):
            raise ModeMismatch("exact polynomial evaluated at float point; "
                               "convert with to_float() first")
        acc = QQi(0) if (isinstance(v, QQi) or any(isinstance(c, QQi) for c in p.coeffs)) else Fraction(0)
        for c in reversed(p.coeffs):
            acc = acc * v + c
        return _demote(acc)
    acc = 0j
    v = complex(v)
    for c in reversed(p.coeffs):
        acc = acc * v + c
    return acc


class BiPoly:
    """Polynomial in an outer variable whose coefficients are Polys in z.

    Evaluating at numeric z then at the outer variable agrees with joint
    evaluation, which is the representation's defining invariant.
    """

    __slots__ = ("outer", "coeffs", "inner")

    def __init__(self, outer, coeffs, inner="z"):
        self.outer = outer
        self.inner = inner
        cs = list(coeffs)
        for c in cs:
            if not isinstance(c, Poly) or c.var != inner:
                raise ValueError(f"BiPoly coefficients must be Polys in {inner!r}")
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    @property
    def mode(self) -> str:
        return FLOAT if any(c.mode == FLOAT for c in self.coeffs) else EXACT

    @property
    def degree_outer(self) -> int:
        return len(self.coeffs) - 1

    def __repr__(self):
        return f"BiPoly({self.outer!r}/{self.inner!r}, degree {self.degree_outer})"

    def __eq__(self, other):
        if not isinstance(other, BiPoly):
            return NotImplemented
        return (self.outer == other.outer and self.inner == other.inner
                and self.coeffs == other.coeffs)

    def eval_at_z(self, zval: complex) -> Poly:
        """Fix the inner variable; returns a float-mode Poly in the outer."""
        return Poly(self.outer, [complex(poly_eval(c.to_float(), complex(zval)))
                                 for c in self.coeffs])

    def eval(self, zval, outer_val) -> complex:
        acc = 0j
        o = complex(outer_val)
        for c in reversed(self.coeffs):
            acc = acc * o + poly_eval(c.to_float(), complex(zval))
        return acc

    def to_mpoly(self) -> MPoly:
        vars = _order_vars((self.outer, self.inner))
        total = MPoly.zero(vars)
        ov = MPoly.var(self.outer, vars)
        for e, c in enumerate(self.coeffs):
            total = total + c.to_mpoly(vars) * ov ** e
        return total

    @classmethod
    def from_mpoly(cls, mp: MPoly, outer, inner="z") -> "BiPoly":
        return mp.to_bipoly(outer, inner)

    def canonical(self) -> "BiPoly":
        """Content-1 normalization: divide by the polynomial-in-z content of
        all coefficients and sign-normalize."""
        mp = self.to_mpoly()
        prim = primitive_in(mp, self.outer)
        return prim.to_bipoly(self.outer, self.inner)

    def to_json_dict(self) -> dict:
        return {"variable": self.outer, "inner_variable": self.inner,
                "mode": self.mode,
                "coefficients": [c.to_json_dict() for c in self.coeffs]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d) -> "BiPoly":
        return cls(d["variable"], [Poly.from_json_dict(c) for c in d["coefficients"]],
                   inner=d["inner_variable"])


# ---------------------------------------------------------------------------
# rational functions
# ---------------------------------------------------------------------------

class RatFunc:
    """Ratio of two MPolys; arithmetic does not reduce automatically."""

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: MPoly = None):
        if den is None:
            den = MPoly.const(1, num.vars)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    def __repr__(self):
        return f"RatFunc({self.num!r} / {self.den!r})"

    @classmethod
    def from_mpoly(cls, p: MPoly) -> "RatFunc":
        return cls(p)

    def __add__(self, other):
        other = _as_ratfunc(other, self.num.vars)
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = _as_ratfunc(other, self.num.vars)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_ratfunc(other, self.num.vars)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_ratfunc(other, self.num.vars)
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _as_ratfunc(other, self.num.vars)
        return other / self

    def derivative(self, name) -> "RatFunc":
        return RatFunc(self.num.derivative(name) * self.den
                       - self.num * self.den.derivative(name),
                       self.den * self.den)

    def eval_complex(self, assignment) -> complex:
        return self.num.eval_complex(assignment) / self.den.eval_complex(assignment)

    def cancel_univar(self) -> "RatFunc":
        """Cancel the gcd when num and den are univariate in the same var."""
        free = [v for v in self.num.vars if self.num.degree_in(v) > 0
                or self.den.degree_in(v) > 0]
        if len(free) > 1:
            return self
        g = gcd_univar(self.num, self.den)
        if g.total_degree() < 1:
            return self
        return RatFunc(self.num.div_exact(g), self.den.div_exact(g))


def _as_ratfunc(v, vars):
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, MPoly):
        return RatFunc(v)
    return RatFunc(MPoly.const(v, vars))


# ---------------------------------------------------------------------------
# resultants, discriminants, gcd
# ---------------------------------------------------------------------------

def _coerce_mpoly(p):
    if isinstance(p, MPoly):
        return p
    if isinstance(p, Poly):
        return p.to_mpoly()
    if isinstance(p, BiPoly):
        return p.to_mpoly()
    raise TypeError(f"cannot interpret {type(p).__name__} as a polynomial")


def sylvester_matrix(p, q, eliminate):
    """Sylvester matrix of p, q with respect to the eliminated variable;
    entries are MPolys in the remaining variables."""
    p = _coerce_mpoly(p)
    q = _coerce_mpoly(q)
    p, q = align(p, q)
    m = p.degree_in(eliminate)
    n = q.degree_in(eliminate)
    if m < 1 or n < 1:
        raise DegreeZero(f"both inputs must contain {eliminate!r} "
                         f"(degrees {m}, {n})")
    cp = p.coeffs_in(eliminate)
    cq = q.coeffs_in(eliminate)
    size = m + n
    zero = MPoly.zero(p.vars)
    mat = [[zero] * size for _ in range(size)]
    for r in range(n):
        for i, c in enumerate(reversed(cp)):
            mat[r][r + i] = c
    for r in range(m):
        for i, c in enumerate(reversed(cq)):
            mat[n + r][r + i] = c
    return mat


def det_bareiss(mat):
    """Fraction-free Bareiss determinant; entries are MPolys over a shared
    variable tuple.  Integer entries stay integer throughout."""
    n = len(mat)
    if n == 0:
        raise ValueError("empty matrix")
    vars = mat[0][0].vars
    M = [[e.terms.copy() for e in row] for row in mat]
    one = {0: 1}
    prev = one
    sign = 1

    def mul(ta, tb):
        if len(ta) > len(tb):
            ta, tb = tb, ta
        r = {}
        get = r.get
        for ka, va in ta.items():
            for kb, vb in tb.items():
                k = ka + kb
                nv = get(k, 0) + va * vb
                if _scalar_zero(nv):
                    if k in r:
                        del r[k]
                else:
                    r[k] = nv
        return r

    def sub(ta, tb):
        r = dict(ta)
        for k, v in tb.items():
            nv = r.get(k, 0) - v
            if _scalar_zero(nv):
                r.pop(k, None)
            else:
                r[k] = nv
        return r

    def div_terms(ta, tb):
        return MPoly(vars, ta, _clean=False).div_exact(MPoly(vars, tb, _clean=False)).terms

    for k in range(n - 1):
        if not M[k][k]:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return MPoly.zero(vars)
        Mkk = M[k][k]
        for i in range(k + 1, n):
            Mik = M[i][k]
            for j in range(k + 1, n):
                num = sub(mul(Mkk, M[i][j]), mul(Mik, M[k][j])) if Mik else mul(Mkk, M[i][j])
                if prev is not one and num:
                    num = div_terms(num, prev)
                M[i][j] = num
            M[i][k] = {}
        prev = Mkk
    det = MPoly(vars, M[n - 1][n - 1])
    return -det if sign < 0 else det


def resultant(p, q, eliminate):
    """Resultant as the Sylvester determinant in the eliminated variable.

    Result may carry an overall factor relative to reference polynomials;
    comparisons are made up to a nonzero scalar after content normalization.
    Returns a Poly / BiPoly when one or two variables remain, else an MPoly.
    """
    want_container = isinstance(p, (Poly, BiPoly)) or isinstance(q, (Poly, BiPoly))
    res = det_bareiss(sylvester_matrix(p, q, eliminate))
    if not want_container:
        return res
    remaining = [v for v in res.vars if v != eliminate and res.degree_in(v) > 0]
    if len(remaining) == 0:
        return res.to_poly(eliminate if not res.vars else res.vars[0]) if res.vars \
            else Poly(eliminate, [res.const_value() or 0])
    if len(remaining) == 1:
        return res.to_poly(remaining[0])
    if len(remaining) == 2 and "z" in remaining:
        outer = remaining[0] if remaining[1] == "z" else remaining[1]
        return res.to_bipoly(outer, "z")
    return res


def discriminant(p, var):
    """Discriminant of the monic form of p with respect to var.

    Computed as (-1)^(n(n-1)/2) * resultant(p, dp/dvar) / lc^(2n-1) and
    returned as a RatFunc of the remaining variables.  This normalization
    makes the result invariant under scaling p, matching reference
    discriminants up to a constant convention factor.
    """
    mp = _coerce_mpoly(p)
    n = mp.degree_in(var)
    if n < 2:
        raise DegreeTooLow(f"degree {n} < 2 in {var!r}")
    res = det_bareiss(sylvester_matrix(mp, mp.derivative(var), var))
    lc = mp.leading_in(var)
    sign = -1 if (n * (n - 1) // 2) % 2 else 1
    num = res if sign > 0 else -res
    rf = RatFunc(num, lc ** (2 * n - 1))
    return rf.cancel_univar()


def gcd_univar(a: MPoly, b: MPoly) -> MPoly:
    """GCD of two exact polynomials that are univariate (in the same single
    variable); returned with content 1 and positive leading coefficient."""
    free = [v for v in _order_vars(a.vars + b.vars)
            if a.degree_in(v) > 0 or b.degree_in(v) > 0]
    if len(free) > 1:
        raise ValueError("gcd_univar requires univariate inputs")
    if a.is_zero():
        return b.canonical() if not b.is_zero() else b
    if b.is_zero():
        return a.canonical()
    var = free[0] if free else None
    if var is None:
        return MPoly.const(1, a.vars)
    a, b = align(a, b)

    def to_list(p):
        cs = p.coeffs_in(var)
        return [Fraction(c.const_value() or 0) for c in cs]

    fa, fb = to_list(a), to_list(b)
    while fb and any(fb):
        # monic Euclid over Q
        lead = fb[-1]
        fb = [c / lead for c in fb]
        # remainder of fa by monic fb
        r = fa[:]
        db = len(fb) - 1
        while len(r) - 1 >= db and any(r):
            c = r[-1]
            shift = len(r) - 1 - db
            for i, bc in enumerate(fb):
                r[shift + i] -= c * bc
            while r and r[-1] == 0:
                r.pop()
        fa, fb = fb, r
    g = MPoly.zero(a.vars)
    xv = MPoly.var(var, a.vars)
    for e, c in enumerate(fa):
        if c:
            g = g + MPoly.const(c, a.vars) * xv ** e
    return g.canonical()


def content_in(p: MPoly, main: str) -> MPoly:
    """Polynomial content of p with respect to ``main``: gcd of the
    coefficient polynomials (which must be univariate)."""
    cs = [c for c in p.coeffs_in(main) if not c.is_zero()]
    if not cs:
        return MPoly.zero(p.vars)
    g = cs[0]
    for c in cs[1:]:
        g = gcd_univar(g, c)
        if g.total_degree() == 0:
            break
    return g.canonical()


def primitive_in(p: MPoly, main: str) -> MPoly:
    """p divided by its polynomial content in ``main``, scaled to rational
    content 1 with a positive-real leading coefficient of the leading-in-main
    coefficient polynomial."""
    if p.is_zero():
        return p
    g = content_in(p, main)
    out = p.div_exact(g).canonical()
    lead = out.leading_in(main)
    ls = lead.terms[max(lead.terms)]
    if isinstance(ls, QQi):
        neg = ls.re < 0 or (ls.re == 0 and ls.im < 0)
    else:
        neg = ls < 0
    return -out if neg else out


def gcd_in_var(p: MPoly, q: MPoly, var: str) -> MPoly:
    """GCD of p, q viewed as polynomials in ``var`` with univariate
    polynomial coefficients (primitive PRS).  Used to pull repeated factors
    such as the squared quadratic out of equal-parameter conditions."""
    p, q = align(p, q)
    a, b = p, q
    if a.degree_in(var) < b.degree_in(var):
        a, b = b, a
    a = primitive_in(a, var) if not a.is_zero() else a
    b = primitive_in(b, var) if not b.is_zero() else b
    while not b.is_zero():
        # pseudo-remainder of a by b in var
        da, db = a.degree_in(var), b.degree_in(var)
        if db == 0:
            return MPoly.const(1, a.vars)
        lb = b.leading_in(var)
        r = a
        vdeg = r.degree_in(var)
        vm = MPoly.var(var, a.vars)
        while vdeg >= db and not r.is_zero():
            lr = r.leading_in(var)
            r = r * lb - b * lr * vm ** (vdeg - db)
            new_deg = r.degree_in(var)
            if new_deg == vdeg:
                raise RuntimeError("pseudo-division failed to reduce degree")
            vdeg = new_deg
        a, b = b, (primitive_in(r, var) if not r.is_zero() else r)
    return primitive_in(a, var)
