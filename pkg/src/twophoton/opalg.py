"""Exact noncommutative algebra of position and momentum operator words.

Every expression is stored in normal order: a commuting product of position
factors on the left and a commuting product of momenta on the right.  Moving a
momentum past a position factor uses ``[p, f(x)] = -i hbar f'(x)``, so the only
position factors allowed are those closed under differentiation: coordinate
powers, exponentials of linear forms, sign functions and named abstract
functions of linear forms.

Coefficients are Laurent polynomials in named parameters (``hbar``, ``m``,
``omega``, ...) with exact Gaussian-rational coefficients, so comparisons are
exact equality.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence, Union

from .errors import ParameterError, ParseError

AXES = "xyz"
HBAR = "hbar"

Coord = tuple[int, int]  # (particle, axis)
Monomial = tuple[tuple[str, int], ...]


# ---------------------------------------------------------------------------
# scalars


class GaussRat:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def coerce(v) -> "GaussRat":
        if isinstance(v, GaussRat):
            return v
        if isinstance(v, (int, Fraction)):
            return GaussRat(v)
        if isinstance(v, complex):
            return GaussRat(Fraction(v.real), Fraction(v.imag))
        if isinstance(v, float):
            return GaussRat(Fraction(v))
        raise TypeError(f"cannot use {v!r} as an exact scalar")

    def __add__(self, o):
        o = GaussRat.coerce(o)
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GaussRat.coerce(o))

    def __rsub__(self, o):
        return GaussRat.coerce(o) - self

    def __mul__(self, o):
        o = GaussRat.coerce(o)
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRat":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("division by zero scalar")
        return GaussRat(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * GaussRat.coerce(o).inverse()

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        try:
            o = GaussRat.coerce(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRat({self})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        im = "" if abs(self.im) == 1 else str(abs(self.im))
        if not self.re:
            return f"{'-' if self.im < 0 else ''}{im}i"
        return f"({self.re}{'-' if self.im < 0 else '+'}{im}i)"


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
        if d[k] == 0:
            del d[k]
    return tuple(sorted(d.items()))


def _mono_pow(a: Monomial, n: int) -> Monomial:
    return tuple((k, e * n) for k, e in a) if n else ()


class Coeff:
    """Laurent polynomial in named parameters with Gaussian-rational coefficients."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[Monomial, GaussRat] | None = None):
        self._t = {m: GaussRat.coerce(v) for m, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, v) -> "Coeff":
        return cls({(): GaussRat.coerce(v)})

    @classmethod
    def param(cls, name: str, exp: int = 1) -> "Coeff":
        return cls({((name, exp),) if exp else (): GaussRat(1)})

    @classmethod
    def monomial(cls, mono: Monomial, v=1) -> "Coeff":
        return cls({mono: GaussRat.coerce(v)})

    def items(self):
        return sorted(self._t.items())

    def __bool__(self):
        return bool(self._t)

    def __add__(self, o):
        o = as_coeff(o)
        t = dict(self._t)
        for m, v in o._t.items():
            t[m] = t.get(m, GaussRat()) + v
        return Coeff(t)

    __radd__ = __add__

    def __neg__(self):
        return Coeff({m: -v for m, v in self._t.items()})

    def __sub__(self, o):
        return self + (-as_coeff(o))

    def __rsub__(self, o):
        return as_coeff(o) - self

    def __mul__(self, o):
        if isinstance(o, OperatorExpr):
            return NotImplemented
        o = as_coeff(o)
        t: dict[Monomial, GaussRat] = {}
        for m1, v1 in self._t.items():
            for m2, v2 in o._t.items():
                m = _mono_mul(m1, m2)
                t[m] = t.get(m, GaussRat()) + v1 * v2
        return Coeff(t)

    __rmul__ = __mul__

    def is_monomial(self) -> bool:
        return len(self._t) == 1

    def as_monomial(self) -> tuple[Monomial, GaussRat]:
        if len(self._t) != 1:
            raise ValueError(f"{self} is not a single monomial")
        return next(iter(self._t.items()))

    def inverse(self) -> "Coeff":
        mono, v = self.as_monomial()
        return Coeff({_mono_pow(mono, -1): v.inverse()})

    def __truediv__(self, o):
        return self * as_coeff(o).inverse()

    def __rtruediv__(self, o):
        return as_coeff(o) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Coeff.const(1)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "Coeff":
        return Coeff({m: v.conjugate() for m, v in self._t.items()})

    def __eq__(self, o):
        try:
            o = as_coeff(o)
        except TypeError:
            return NotImplemented
        return self._t == o._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def free_params(self) -> set[str]:
        return {k for m in self._t for k, _ in m}

    def subs(self, bindings: Mapping[str, object]) -> "Coeff":
        out = Coeff()
        for mono, v in self._t.items():
            factor = Coeff.const(v)
            rest = []
            for name, e in mono:
                if name not in bindings:
                    rest.append((name, e))
                    continue
                val = GaussRat.coerce(_as_number(bindings[name]))
                if not val and e < 0:
                    raise ZeroDivisionError(f"parameter {name!r} bound to zero appears with exponent {e}")
                factor = factor * Coeff.const(_gpow(val, e))
            out = out + factor * Coeff.monomial(tuple(rest))
        return out

    def scalar(self) -> GaussRat:
        """The value of a parameter-free coefficient."""
        if not self._t:
            return GaussRat()
        mono, v = self.as_monomial()
        if mono:
            raise ParameterError(f"unbound parameters {sorted(self.free_params())} in {self}")
        return v

    def __complex__(self):
        return complex(self.scalar())

    def __repr__(self):
        return f"Coeff({self})"

    def __str__(self):
        if not self._t:
            return "0"
        parts = [_mono_str(m, v) for m, v in self.items()]
        return " + ".join(parts).replace("+ -", "- ")


def _gpow(v: GaussRat, e: int) -> GaussRat:
    if e < 0:
        return _gpow(v.inverse(), -e)
    out = GaussRat(1)
    for _ in range(e):
        out = out * v
    return out


def _mono_str(mono: Monomial, v: GaussRat) -> str:
    params = "*".join(k if e == 1 else f"{k}^{e}" for k, e in mono)
    if not params:
        return str(v)
    if v == 1:
        return params
    if v == -1:
        return "-" + params
    return f"{v}*{params}"


def _as_number(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def as_coeff(v) -> Coeff:
    """Coerce numbers, exact scalars and parameter names to a `Coeff`."""
    if isinstance(v, Coeff):
        return v
    if isinstance(v, str):
        try:
            return Coeff.const(Fraction(v))
        except ValueError:
            if not v.isidentifier():
                raise TypeError(f"{v!r} is neither a number nor a parameter name") from None
            return Coeff.param(v)
    return Coeff.const(GaussRat.coerce(v))


# ---------------------------------------------------------------------------
# position factors


def coord_name(c: Coord) -> str:
    particle, axis = c
    return AXES[axis] + (str(particle) if particle else "")


@dataclass(frozen=True, order=True)
class LinearForm:
    """Rational linear combination of coordinates plus a rational offset."""

    coeffs: tuple[tuple[Coord, Fraction], ...]
    offset: Fraction = Fraction(0)

    @classmethod
    def of(cls, coeffs: Mapping[Coord, object], offset=0) -> "LinearForm":
        clean = {c: Fraction(v) for c, v in coeffs.items() if Fraction(v)}
        return cls(tuple(sorted(clean.items())), Fraction(offset))

    @classmethod
    def coordinate(cls, axis: int = 0, particle: int = 0) -> "LinearForm":
        return cls.of({(particle, axis): 1})

    def coef(self, c: Coord) -> Fraction:
        for cc, v in self.coeffs:
            if cc == c:
                return v
        return Fraction(0)

    def coords(self) -> tuple[Coord, ...]:
        return tuple(c for c, _ in self.coeffs)

    def __add__(self, o):
        if isinstance(o, LinearForm):
            d = dict(self.coeffs)
            for c, v in o.coeffs:
                d[c] = d.get(c, 0) + v
            return LinearForm.of(d, self.offset + o.offset)
        return LinearForm.of(dict(self.coeffs), self.offset + Fraction(o))

    def __neg__(self):
        return self * -1

    def __sub__(self, o):
        return self + (-o if isinstance(o, LinearForm) else -Fraction(o))

    def __mul__(self, k):
        k = Fraction(k)
        return LinearForm.of({c: v * k for c, v in self.coeffs}, self.offset * k)

    __rmul__ = __mul__

    def is_coordinate(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0][1] == 1 and not self.offset

    def __str__(self):
        out = ""
        for c, v in self.coeffs:
            name = coord_name(c)
            sign = "-" if v < 0 else "+"
            mag = "" if abs(v) == 1 else f"{abs(v)}*"
            out += f" {sign} {mag}{name}"
        if self.offset:
            out += f" {'-' if self.offset < 0 else '+'} {abs(self.offset)}"
        out = out.strip()
        if out.startswith("+ "):
            out = out[2:]
        elif out.startswith("- "):
            out = "-" + out[2:]
        return out or "0"


@dataclass(frozen=True)
class Pow:
    """Power of one coordinate; the exponent is the power."""

    coord: Coord


@dataclass(frozen=True)
class Exp:
    """exp(r * mono * form); the exponent slot holds the rational rate r."""

    form: LinearForm
    mono: Monomial = ()


@dataclass(frozen=True)
class Sgn:
    form: LinearForm


@dataclass(frozen=True)
class Fn:
    """Named abstract function of one or more linear forms, with partial derivative orders."""

    name: str
    forms: tuple[LinearForm, ...]
    orders: tuple[int, ...]


Factor = Union[Pow, Exp, Sgn, Fn]
PosPart = tuple[tuple[Factor, object], ...]
MomPart = tuple[tuple[Coord, int], ...]
Key = tuple[PosPart, MomPart]


def _fkey(f: Factor):
    if isinstance(f, Pow):
        return (0, f.coord)
    if isinstance(f, Exp):
        return (1, f.form, f.mono)
    if isinstance(f, Sgn):
        return (2, f.form)
    return (3, f.name, f.forms, f.orders)


def _pos_key(pos: PosPart):
    return tuple((_fkey(f), e) for f, e in pos)


def _pos_mul(a: PosPart, b: PosPart) -> PosPart:
    d: dict[Factor, object] = dict(a)
    for f, e in b:
        d[f] = d.get(f, 0) + e
    out = []
    for f, e in d.items():
        if isinstance(f, Sgn):
            e = e % 2
        if e:
            out.append((f, e))
    out.sort(key=lambda fe: _fkey(fe[0]))
    return tuple(out)


def _mom_mul(a: MomPart, b: MomPart) -> MomPart:
    d = dict(a)
    for c, n in b:
        d[c] = d.get(c, 0) + n
    return tuple(sorted((c, n) for c, n in d.items() if n))


def _minus_i_hbar(k: int) -> Coeff:
    unit = _gpow(GaussRat(0, -1), k)
    return Coeff({((HBAR, k),) if k else (): unit})


def _add(d: dict, key, c: Coeff):
    if key in d:
        s = d[key] + c
        if s:
            d[key] = s
        else:
            del d[key]
    elif c:
        d[key] = c


@lru_cache(maxsize=None)
def _d_pos(pos: PosPart, c: Coord) -> tuple[tuple[PosPart, Coeff], ...]:
    """Partial derivative of a position product with respect to one coordinate."""
    out: dict[PosPart, Coeff] = {}
    for idx, (f, e) in enumerate(pos):
        rest = pos[:idx] + pos[idx + 1:]
        if isinstance(f, Pow):
            if f.coord == c:
                _add(out, _pos_mul(rest, ((f, e - 1),)), Coeff.const(e))
        elif isinstance(f, Exp):
            k = f.form.coef(c)
            if k:
                _add(out, pos, Coeff.monomial(f.mono, e * k))
        elif isinstance(f, Fn):
            for slot, form in enumerate(f.forms):
                k = form.coef(c)
                if not k:
                    continue
                orders = list(f.orders)
                orders[slot] += 1
                g = Fn(f.name, f.forms, tuple(orders))
                new = _pos_mul(_pos_mul(rest, ((f, e - 1),)), ((g, 1),))
                _add(out, new, Coeff.const(e * k))
        # sign factors have zero derivative away from their zero set
    return tuple(out.items())


@lru_cache(maxsize=None)
def _mom_pos(mom: MomPart, pos: PosPart) -> tuple[tuple[Key, Coeff], ...]:
    """Normal-order p^n * P as sum of (P', p^n') terms."""
    result: dict[Key, Coeff] = {(pos, ()): Coeff.const(1)}
    for coord, n in mom:
        new: dict[Key, Coeff] = {}
        for (P, rem), cf in result.items():
            deriv: dict[PosPart, Coeff] = {P: Coeff.const(1)}
            for k in range(n + 1):
                if k:
                    nxt: dict[PosPart, Coeff] = {}
                    for Q, qc in deriv.items():
                        for R, rc in _d_pos(Q, coord):
                            _add(nxt, R, qc * rc)
                    deriv = nxt
                if not deriv:
                    break
                scale = _minus_i_hbar(k) * comb(n, k)
                rem2 = _mom_mul(rem, ((coord, n - k),))
                for Q, qc in deriv.items():
                    _add(new, (Q, rem2), cf * qc * scale)
        result = new
    return tuple(result.items())


def _term_mul(a: Key, b: Key) -> list[tuple[Key, Coeff]]:
    p1, m1 = a
    p2, m2 = b
    if not m1:
        return [((_pos_mul(p1, p2), m2), Coeff.const(1))]
    return [((_pos_mul(p1, q), _mom_mul(r, m2)), c) for (q, r), c in _mom_pos(m1, p2)]


def _sort_key(k: Key):
    pos, mom = k
    return (_pos_key(pos), mom)


class OperatorExpr:
    """Canonical (normal-ordered) sum of operator words with exact coefficients.

    Instances are immutable; arithmetic returns new canonical expressions.
    """

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[Key, Coeff] | None = None):
        self._t: dict[Key, Coeff] = {k: c for k, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls) -> "OperatorExpr":
        return cls()

    @classmethod
    def identity(cls, coeff=1) -> "OperatorExpr":
        return cls({((), ()): as_coeff(coeff)})

    def terms(self) -> list[tuple[Key, Coeff]]:
        return sorted(self._t.items(), key=lambda kv: _sort_key(kv[0]))

    def coefficient(self, key: Key) -> Coeff:
        return self._t.get(key, Coeff())

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def __len__(self):
        return len(self._t)

    def __add__(self, o):
        o = _as_expr(o)
        t = dict(self._t)
        for k, c in o._t.items():
            _add(t, k, c)
        return OperatorExpr(t)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr({k: -c for k, c in self._t.items()})

    def __sub__(self, o):
        return self + (-_as_expr(o))

    def __rsub__(self, o):
        return _as_expr(o) - self

    def __mul__(self, o):
        if not isinstance(o, OperatorExpr):
            c = as_coeff(o)
            return OperatorExpr({k: v * c for k, v in self._t.items()})
        t: dict[Key, Coeff] = {}
        for ka, ca in self._t.items():
            for kb, cb in o._t.items():
                cab = ca * cb
                for k, c in _term_mul(ka, kb):
                    _add(t, k, cab * c)
        return OperatorExpr(t)

    def __rmul__(self, o):
        c = as_coeff(o)
        return OperatorExpr({k: c * v for k, v in self._t.items()})

    def __truediv__(self, o):
        return self * as_coeff(o).inverse()

    def __pow__(self, n: int):
        out = OperatorExpr.identity()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, o):
        if isinstance(o, OperatorExpr):
            return self._t == o._t
        try:
            return self._t == _as_expr(o)._t
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def adjoint(self) -> "OperatorExpr":
        """Hermitian adjoint, taking parameters and abstract functions as real."""
        out = OperatorExpr()
        for (pos, mom), c in self._t.items():
            out = out + OperatorExpr({((), mom): c.conjugate()}) * OperatorExpr({(pos, ()): Coeff.const(1)})
        return out

    def free_params(self) -> set[str]:
        names = set()
        for (pos, _), c in self._t.items():
            names |= c.free_params()
            for f, _ in pos:
                if isinstance(f, Exp):
                    names |= {k for k, _ in f.mono}
        return names

    def coordinates(self) -> set[Coord]:
        cs: set[Coord] = set()
        for (pos, mom), _ in self._t.items():
            cs |= {c for c, _ in mom}
            for f, _ in pos:
                if isinstance(f, Pow):
                    cs.add(f.coord)
                elif isinstance(f, (Exp, Sgn)):
                    cs |= set(f.form.coords())
                else:
                    for form in f.forms:
                        cs |= set(form.coords())
        return cs

    def subs(self, bindings: Mapping[str, object]) -> "OperatorExpr":
        out: dict[Key, Coeff] = {}
        for (pos, mom), c in self._t.items():
            c = c.subs(bindings)
            new_pos: PosPart = ()
            for f, e in pos:
                if isinstance(f, Exp) and any(k in bindings for k, _ in f.mono):
                    rate = Coeff.monomial(f.mono, e).subs(bindings)
                    mono, r = rate.as_monomial()
                    if r.im:
                        raise ParameterError("exponential rates must stay real")
                    new_pos = _pos_mul(new_pos, ((Exp(f.form, mono), r.re),))
                else:
                    new_pos = _pos_mul(new_pos, ((f, e),))
            _add(out, (new_pos, mom), c)
        return OperatorExpr(out)

    def __repr__(self):
        return f"OperatorExpr<{len(self._t)} terms>"

    def __str__(self):
        return format_expr(self)


def _as_expr(v) -> OperatorExpr:
    if isinstance(v, OperatorExpr):
        return v
    return OperatorExpr.identity(as_coeff(v))


# ---------------------------------------------------------------------------
# constructors


def position(axis: int = 0, particle: int = 0) -> OperatorExpr:
    return OperatorExpr({(((Pow((particle, axis)), 1),), ()): Coeff.const(1)})


def momentum(axis: int = 0, particle: int = 0) -> OperatorExpr:
    return OperatorExpr({((), (((particle, axis), 1),)): Coeff.const(1)})


def linear(form: LinearForm) -> OperatorExpr:
    out = OperatorExpr.identity(form.offset)
    for c, v in form.coeffs:
        out = out + position(c[1], c[0]) * v
    return out


def exp_of(form: LinearForm, rate=1) -> OperatorExpr:
    """exp(rate * form) with `rate` a rational or a rational times a parameter monomial."""
    mono, r = as_coeff(rate).as_monomial()
    if r.im:
        raise ValueError("exponential rates must be real")
    r = r.re
    if not form.coeffs:
        if r * form.offset:
            raise ValueError("exp of a nonzero constant is not exactly representable")
        return OperatorExpr.identity()
    lead = form.coeffs[0][1]
    form = form * (1 / lead)
    r = r * lead
    if not r:
        return OperatorExpr.identity()
    return OperatorExpr({(((Exp(form, mono), r),), ()): Coeff.const(1)})


def sign_of(form: LinearForm) -> OperatorExpr:
    if not form.coeffs:
        raise ValueError("sign of a constant form")
    lead = form.coeffs[0][1]
    scale = -1 if lead < 0 else 1
    form = form * (1 / abs(lead))
    return OperatorExpr({(((Sgn(form), 1),), ()): Coeff.const(scale)})


def func(name: str, *forms: LinearForm, orders: Sequence[int] | None = None) -> OperatorExpr:
    if name in ("exp", "sign") or not name.isidentifier():
        raise ValueError(f"invalid function name {name!r}")
    orders = tuple(orders) if orders is not None else (0,) * len(forms)
    if len(orders) != len(forms):
        raise ValueError("one derivative order per argument")
    return OperatorExpr({(((Fn(name, tuple(forms), orders), 1),), ()): Coeff.const(1)})


def product(*factors) -> OperatorExpr:
    out = OperatorExpr.identity()
    for f in factors:
        out = out * _as_expr(f)
    return out


def canonicalize(e) -> OperatorExpr:
    """Normal-order an expression.

    Accepts an `OperatorExpr` (already canonical; rebuilt term by term) or an
    iterable of raw ``(coefficient, [factor, ...])`` words in arbitrary order.
    """
    if isinstance(e, OperatorExpr):
        out = OperatorExpr()
        for key, c in e.terms():
            out = out + OperatorExpr({key: c})
        return out
    out = OperatorExpr()
    for coeff, word in e:
        out = out + product(*word) * as_coeff(coeff)
    return out


def commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return a * b - b * a


def equal(a, b) -> bool:
    return (_as_expr(a) - _as_expr(b)).is_zero()


def substitute_parameters(e: OperatorExpr, bindings: Mapping[str, object]) -> OperatorExpr:
    return e.subs(bindings)


# ---------------------------------------------------------------------------
# text form


def _factor_str(f: Factor, e) -> str:
    if isinstance(f, Pow):
        return coord_name(f.coord) + (f"^{e}" if e != 1 else "")
    if isinstance(f, Exp):
        rate = str(Coeff.monomial(f.mono, e))
        arg = str(f.form) if f.form.is_coordinate() else f"({f.form})"
        if rate == "1":
            return f"exp({arg})"
        if rate == "-1":
            return f"exp(-{arg})"
        return f"exp({rate}*{arg})"
    if isinstance(f, Sgn):
        return f"sign({f.form})"
    args = ", ".join(str(form) for form in f.forms)
    if not any(f.orders):
        head = f.name
    elif len(f.orders) == 1 and f.orders[0] <= 3:
        head = f.name + "'" * f.orders[0]
    else:
        head = f"{f.name}[{','.join(map(str, f.orders))}]"
    return f"{head}({args})" + (f"^{e}" if e != 1 else "")


def format_word(key: Key) -> str:
    pos, mom = key
    parts = [_factor_str(f, e) for f, e in pos]
    for c, n in mom:
        parts.append(f"p_{coord_name(c)}" + (f"^{n}" if n != 1 else ""))
    return " ".join(parts) or "1"


def format_expr(e: OperatorExpr) -> str:
    """Deterministic text form: one ``coefficient | word`` line per term."""
    if e.is_zero():
        return "0"
    return "\n".join(f"{c} | {format_word(k)}" for k, c in e.terms())


_COORD_RE = re.compile(r"^([xyz])(\d*)$")


def _parse_coord(name: str) -> Coord | None:
    m = _COORD_RE.match(name)
    if not m:
        return None
    return (int(m.group(2) or 0), AXES.index(m.group(1)))


def _prep(src: str) -> str:
    src = src.replace("^", "**")
    return re.sub(r"(\d)\s*i\b", r"\1*i", src)


class _Affine:
    """Affine expression in coordinates with `Coeff` coefficients (parser helper)."""

    def __init__(self, lin=None, const=None):
        self.lin: dict[Coord, Coeff] = {k: v for k, v in (lin or {}).items() if v}
        self.const = const if const is not None else Coeff()

    def __add__(self, o):
        lin = dict(self.lin)
        for k, v in o.lin.items():
            lin[k] = lin.get(k, Coeff()) + v
        return _Affine(lin, self.const + o.const)

    def scale(self, c: Coeff):
        return _Affine({k: v * c for k, v in self.lin.items()}, self.const * c)


def _eval_affine(node, allow_coords: bool):
    if isinstance(node, ast.Expression):
        return _eval_affine(node.body, allow_coords)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return _Affine(const=Coeff.const(node.value))
    if isinstance(node, ast.Name):
        if node.id == "i":
            return _Affine(const=Coeff.const(GaussRat(0, 1)))
        c = _parse_coord(node.id)
        if c is not None and allow_coords:
            return _Affine({c: Coeff.const(1)})
        return _Affine(const=Coeff.param(node.id))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_affine(node.operand, allow_coords)
        return v.scale(Coeff.const(-1)) if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a = _eval_affine(node.left, allow_coords)
        if isinstance(node.op, ast.Pow):
            n = _int_literal(node.right)
            if a.lin:
                raise ParseError("powers of coordinates are not allowed here")
            return _Affine(const=a.const ** n)
        b = _eval_affine(node.right, allow_coords)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a + b.scale(Coeff.const(-1))
        if isinstance(node.op, ast.Mult):
            if a.lin and b.lin:
                raise ParseError("nonlinear product of coordinates")
            return b.scale(a.const) if not a.lin else a.scale(b.const)
        if isinstance(node.op, ast.Div):
            if b.lin:
                raise ParseError("division by a coordinate")
            return a.scale(b.const.inverse())
    raise ParseError(f"unsupported syntax: {ast.dump(node)}")


def _int_literal(node) -> int:
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
        return -_int_literal(node.operand)
    raise ParseError("exponents must be integer literals")


def parse_coeff(src: str) -> Coeff:
    try:
        tree = ast.parse(_prep(src.strip()), mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad coefficient {src!r}") from exc
    return _eval_affine(tree, allow_coords=False).const


def _rational_form(aff: _Affine) -> LinearForm:
    coeffs = {}
    for c, v in aff.lin.items():
        g = v.scalar()
        if g.im:
            raise ParseError("complex coefficient in a linear form")
        coeffs[c] = g.re
    off = aff.const.scalar()
    if off.im:
        raise ParseError("complex offset in a linear form")
    return LinearForm.of(coeffs, off.re)


def parse_form(src: str) -> LinearForm:
    tree = ast.parse(_prep(src.strip()), mode="eval")
    return _rational_form(_eval_affine(tree, allow_coords=True))


def _parse_exp_arg(src: str) -> OperatorExpr:
    aff = _eval_affine(ast.parse(_prep(src.strip()), mode="eval"), allow_coords=True)
    if not aff.lin:
        raise ParseError("exp argument must involve a coordinate")
    monos = set()
    coeffs = {}
    for c, v in aff.lin.items():
        mono, g = v.as_monomial()
        if g.im:
            raise ParseError("imaginary exponential rate")
        monos.add(mono)
        coeffs[c] = g.re
    if len(monos) != 1:
        raise ParseError("exp argument must share one parameter monomial")
    mono = monos.pop()
    offset = Fraction(0)
    if aff.const:
        cm, cg = aff.const.as_monomial()
        if cm != mono or cg.im:
            raise ParseError("exp offset must share the rate monomial")
        offset = cg.re
    return exp_of(LinearForm.of(coeffs, offset), Coeff.monomial(mono, 1))


def _split_top(src: str, sep: str = None) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in src:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if depth == 0 and (ch.isspace() if sep is None else ch == sep):
            if cur.strip():
                out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


_MOM_TOK = re.compile(r"^p_([xyz])(\d*)(?:\^(\d+))?$")
_POW_TOK = re.compile(r"^([xyz])(\d*)(?:\^(\d+))?$")
_CALL_TOK = re.compile(r"^([A-Za-z_]\w*)('*|\[[\d,\s]*\])?\((.*)\)(?:\^(\d+))?$")


def _parse_token(tok: str) -> OperatorExpr:
    if tok == "1":
        return OperatorExpr.identity()
    m = _MOM_TOK.match(tok)
    if m:
        return momentum(AXES.index(m.group(1)), int(m.group(2) or 0)) ** int(m.group(3) or 1)
    m = _POW_TOK.match(tok)
    if m:
        return position(AXES.index(m.group(1)), int(m.group(2) or 0)) ** int(m.group(3) or 1)
    m = _CALL_TOK.match(tok)
    if not m:
        raise ParseError(f"unknown factor {tok!r}")
    name, marks, inner, power = m.groups()
    power = int(power or 1)
    if name == "exp":
        if marks or power != 1:
            raise ParseError("exp takes no derivative marks or powers")
        return _parse_exp_arg(inner)
    forms = [parse_form(a) for a in _split_top(inner, ",")]
    if name == "sign":
        return sign_of(forms[0]) ** power
    if not marks:
        orders = [0] * len(forms)
    elif marks.startswith("'"):
        orders = [len(marks)]
    else:
        orders = [int(v) for v in marks.strip("[]").split(",")]
    return func(name, *forms, orders=orders) ** power


def parse_word(src: str) -> OperatorExpr:
    return product(*(_parse_token(t) for t in _split_top(src)))


def parse_expr(text: str) -> OperatorExpr:
    """Parse ``coefficient | word`` lines (``#`` comments allowed) into a canonical expression."""
    out = OperatorExpr()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line or line == "0":
            continue
        if "|" not in line:
            raise ParseError(f"expected 'coefficient | word': {raw!r}")
        coeff, word = line.split("|", 1)
        out = out + parse_word(word) * parse_coeff(coeff)
    return out


def iter_primitives(e: OperatorExpr) -> Iterable[Factor]:
    for (pos, _), _ in e.terms():
        for f, _ in pos:
            yield f
