"""Commutator recursion O_k = [H0, O_{k-1}] and transition operators."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .errors import DomainError, ModelError, NotRepresentableError, PoleError
from .models import AbstractTwoBody, Coulomb, Hamiltonian, axis_index, dipole_seed
from .opalg import (
    Coeff,
    Exp,
    Fn,
    LinearForm,
    OperatorExpr,
    Pow,
    Sgn,
    as_coeff,
    commutator,
    exp_of,
    func,
    momentum,
    position,
    sign_of,
)


class ScatteringOperatorSequence:
    """Lazily extended list O_1, O_2, ... for one Hamiltonian and seed."""

    def __init__(self, h0: OperatorExpr, seed: OperatorExpr):
        self.h0 = h0
        self._ops: list[OperatorExpr] = [seed]
        self.terminal = seed.is_zero()

    def __len__(self):
        return len(self._ops)

    def order(self, k: int) -> OperatorExpr:
        if k < 1:
            raise DomainError("scattering operators start at order 1")
        while len(self._ops) < k:
            if self.terminal:
                return OperatorExpr()
            nxt = commutator(self.h0, self._ops[-1])
            self._ops.append(nxt)
            if nxt.is_zero():
                self.terminal = True
        return self._ops[k - 1]

    def operators(self, n: int) -> list[OperatorExpr]:
        return [self.order(k) for k in range(1, n + 1)]


@lru_cache(maxsize=64)
def _sequence(h: Hamiltonian, axis: int, with_coupling: bool = True) -> ScatteringOperatorSequence:
    if not h.supports_axis(axis):
        raise NotRepresentableError(
            f"{type(h.potential).__name__} has no symbolic form along axis {'xyz'[axis]}; use the numeric oracle"
        )
    pot = h.potential
    if isinstance(getattr(pot, "coupling", None), Coulomb):
        # only the dependence on r_A - r_B matters to the commutators, so the
        # singular coupling is carried as an abstract reciprocal function
        pot = dataclasses.replace(pot, coupling=AbstractTwoBody("V_C"))
    if with_coupling:
        v = pot.to_operator_expr(h.masses)
    else:
        v = pot.to_operator_expr(h.masses, include_coupling=False)
    return ScatteringOperatorSequence(h.kinetic() + v, dipole_seed(axis, h.n_particles))


def sequence(h: Hamiltonian, axis) -> ScatteringOperatorSequence:
    return _sequence(h, axis_index(axis))


def scattering_operator(h: Hamiltonian, axis, k: int) -> OperatorExpr:
    """O_k for an axis-polarized dipole seed."""
    return sequence(h, axis).order(k)


def detect_double_commutator_closure(h: Hamiltonian, axis) -> Optional[Coeff]:
    """Return lambda with O_3 = lambda O_1 exactly, or None."""
    seq = sequence(h, axis)
    o1, o3 = seq.order(1), seq.order(3)
    if o1.is_zero():
        return None
    key, c1 = o1.terms()[0]
    c3 = o3.coefficient(key)
    if not c3:
        return None
    lam = c3 / c1
    return lam if (o3 - o1 * lam).is_zero() else None


def _num(v) -> complex:
    return complex(v) if not isinstance(v, Coeff) else complex(v.scalar())


@dataclass(frozen=True)
class TransitionOperator:
    """T as weighted scattering operators.

    ``kind == "truncated"``: T_n = sum_k O_k E^-k.
    ``kind == "closed"``: (1 - lam/E^2) T = O_1/E + O_2/E^2, so the weights are
    E/(E^2 - lam) and 1/(E^2 - lam).
    The operators are kept separate from the energy weights so that the
    E -> -E_2 substitution is a rebinding.
    """

    kind: str
    operators: tuple[OperatorExpr, ...]
    energy: object
    lam: Optional[Coeff] = None
    axis: int = 0

    @property
    def order(self) -> int:
        return len(self.operators)

    def weights(self, E, bindings=None) -> list[complex]:
        """Numeric weight of each operator at energy E (any nonzero sign)."""
        E = complex(E)
        if E == 0:
            raise PoleError("T is singular at zero photon energy")
        if self.kind == "truncated":
            return [E ** -(k + 1) for k in range(len(self.operators))]
        lam = _num(self.lam.subs(bindings or {}))
        d = E * E - lam
        if d == 0:
            raise PoleError(f"closed-form T has a pole at E^2 = {lam.real:g}")
        return [E / d, 1 / d]

    def exact_weights(self, E, bindings=None) -> list[Coeff]:
        """Weights as exact coefficients; E may be rational or a parameter name."""
        E = as_coeff(E).subs(bindings or {})
        if self.kind == "truncated":
            return [E ** -(k + 1) for k in range(len(self.operators))]
        d = E * E - self.lam.subs(bindings or {})
        if not d:
            raise PoleError("closed-form T evaluated at its pole")
        if not d.is_monomial():
            raise DomainError("closed-form weights need E and lambda bound to numbers")
        inv = d.inverse()
        return [E * inv, inv]

    def as_expr(self, E=None, bindings=None) -> OperatorExpr:
        """Sum of weighted operators with exact coefficients."""
        E = self.energy if E is None else E
        out = OperatorExpr()
        for w, op in zip(self.exact_weights(E, bindings), self.operators):
            out = out + op.subs(bindings or {}) * w
        return out


def transition_operator(
    h: Hamiltonian,
    E1,
    n: int = 1,
    axis=0,
    exact: bool = False,
) -> TransitionOperator:
    """Truncated T_n, or the resummed harmonic form when `exact` and closure holds."""
    if not isinstance(E1, str) and E1 <= 0:
        raise DomainError(f"photon energy must be positive, got {E1}")
    if n < 1:
        raise DomainError("series order must be at least 1")
    ax = axis_index(axis)
    seq = sequence(h, ax)
    if exact:
        lam = detect_double_commutator_closure(h, ax)
        if lam is None:
            raise ModelError("no double-commutator closure; exact mode is unavailable")
        return TransitionOperator("closed", (seq.order(1), seq.order(2)), E1, lam, ax)
    return TransitionOperator("truncated", tuple(seq.operators(n)), E1, None, ax)


def geometric_expansion(t: TransitionOperator, n: int) -> TransitionOperator:
    """Expand a closed-form T into its first n series orders.

    With O_{2j+1} = lam^j O_1 and O_{2j+2} = lam^j O_2 this reproduces T_n.
    """
    if t.kind != "closed":
        raise ValueError("only closed-form operators are expanded")
    o1, o2 = t.operators
    ops = []
    for k in range(n):
        base = o1 if k % 2 == 0 else o2
        ops.append(base * t.lam ** (k // 2))
    return TransitionOperator("truncated", tuple(ops), t.energy, None, t.axis)


# ---------------------------------------------------------------------------
# multi-particle structure


def coupling_contribution(h: Hamiltonian, axis, k: int) -> OperatorExpr:
    """O_k with the two-body coupling minus O_k without it."""
    pot = h.potential
    if pot.n_particles < 2 or getattr(pot, "coupling", None) is None:
        return OperatorExpr()
    ax = axis_index(axis)
    return _sequence(h, ax, True).order(k) - _sequence(h, ax, False).order(k)


def reciprocal_cancellation_check(h: Hamiltonian, axis=0) -> bool:
    """True iff the reciprocal coupling drops out of O_2."""
    if h.n_particles < 2:
        return False
    return coupling_contribution(h, axis, 2).is_zero()


def _relative_ops(axis: int) -> tuple[OperatorExpr, OperatorExpr]:
    return (position(axis, 0) - position(axis, 1), momentum(axis, 0) - momentum(axis, 1))


def _as_expr(t) -> OperatorExpr:
    if not isinstance(t, TransitionOperator):
        return t
    # symbolic weights keep every order visible to the commutator test
    out = OperatorExpr()
    for k, op in enumerate(t.operators, start=1):
        out = out + op * Coeff.param(f"w{k}")
    return out


def center_of_mass_content(t) -> bool:
    """True iff T is built from R = (x_A + x_B)/2 and P = p_A + p_B alone.

    Equivalent to T commuting with every relative coordinate and momentum.
    Single-particle operators pass vacuously.
    """
    expr = _as_expr(t)
    particles = {c[0] for c in expr.coordinates()}
    if particles <= {0}:
        return True
    if particles != {0, 1}:
        return False
    for ax in range(3):
        for rel in _relative_ops(ax):
            if not commutator(expr, rel).is_zero():
                return False
    return True


def _com_form(form: LinearForm) -> LinearForm:
    coeffs: dict = {}
    for (particle, ax), v in form.coeffs:
        coeffs[(0, ax)] = coeffs.get((0, ax), 0) + v
    return LinearForm.of(coeffs, form.offset)


def to_center_of_mass(expr: OperatorExpr) -> OperatorExpr:
    """Rewrite a two-particle operator with pure centre-of-mass content in R, P.

    Particle 0 of the result is the centre of mass, with R at x_A = x_B = R
    and p_A = p_B = P/2.  Valid because the normal-ordered symbol of such an
    operator depends on x_A + x_B and p_A + p_B only.
    """
    if not center_of_mass_content(expr):
        raise ValueError("operator depends on relative coordinates")
    out = OperatorExpr()
    for (pos, mom), c in expr.terms():
        term = OperatorExpr.identity(c)
        for f, e in pos:
            if isinstance(f, Pow):
                term = term * position(f.coord[1], 0) ** e
            elif isinstance(f, Exp):
                term = term * exp_of(_com_form(f.form), Coeff.monomial(f.mono, e))
            elif isinstance(f, Sgn):
                term = term * sign_of(_com_form(f.form)) ** e
            elif isinstance(f, Fn):
                term = term * func(f.name, *(_com_form(g) for g in f.forms), orders=f.orders) ** e
        for (particle, ax), n in mom:
            term = term * momentum(ax, 0) ** n * Fraction(1, 2**n)
        out = out + term
    return out


def center_of_mass_hamiltonian(h: Hamiltonian) -> Hamiltonian:
    """Single-particle oscillator of mass 2m for an equal-mass harmonic pair."""
    from .models import CoupledHarmonicPair, Harmonic

    pot = h.potential
    if not isinstance(pot, CoupledHarmonicPair):
        raise ModelError("centre-of-mass reduction needs a CoupledHarmonicPair")
    if h.masses[0] != h.masses[1]:
        raise ModelError("centre-of-mass reduction needs equal masses")
    m = h.masses[0]
    if isinstance(m, str):
        raise ModelError("centre-of-mass reduction needs a numeric mass")
    return Hamiltonian(Harmonic(pot.omega), (2 * m,))
