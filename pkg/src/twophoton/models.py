"""Catalog of target potentials and their symbolic and grid forms.

Parameters are exact rationals or parameter names (strings).  Named
parameters stay symbolic in the operator algebra and are bound to rationals
only when a numeric evaluation is requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import ModelError, NotRepresentableError, ParameterError
from .opalg import (
    AXES,
    Coord,
    LinearForm,
    OperatorExpr,
    as_coeff,
    exp_of,
    func,
    linear,
    momentum,
    position,
    sign_of,
)

Param = Union[int, Fraction, str]

REFERENCE_UNITS: dict[str, Fraction] = {
    "V0": Fraction(1),
    "a": Fraction(1, 3),
    "x0": Fraction(0),
    "m": Fraction(1),
    "hbar": Fraction(1),
    "c": Fraction(1),
}


def axis_index(axis) -> int:
    if isinstance(axis, str):
        if axis not in AXES:
            raise ValueError(f"unknown axis {axis!r}")
        return AXES.index(axis)
    if axis not in (0, 1, 2):
        raise ValueError(f"unknown axis {axis!r}")
    return int(axis)


def _param(v) -> Param:
    if isinstance(v, str):
        try:
            return Fraction(v)
        except ValueError:
            if not v.isidentifier():
                raise ModelError(f"invalid parameter {v!r}") from None
            return v
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


def param_value(v: Param, bindings: Mapping[str, object] | None = None) -> float:
    """Numeric value of a parameter under the given bindings."""
    try:
        return float(complex(as_coeff(v).subs(bindings or {})).real)
    except ParameterError as exc:
        raise ParameterError(f"parameter {v!r} is unbound") from exc


def _check_positive(name: str, v: Param):
    if not isinstance(v, str) and v <= 0:
        raise ModelError(f"{name} must be positive, got {v}")


def _per_axis(v) -> tuple:
    if isinstance(v, (tuple, list)):
        if len(v) != 3:
            raise ModelError("per-axis parameters need three entries")
        return tuple(_param(t) for t in v)
    return (_param(v),) * 3


def _coord_form(coord: Coord) -> LinearForm:
    return LinearForm.coordinate(coord[1], coord[0])


class PotentialModel:
    """Base class: one-particle separable potentials unless overridden."""

    n_particles = 1
    separable = True
    symbolic = True
    axes: tuple[int, ...] = (0, 1, 2)

    def axis_expr(self, axis: int, coord: Coord, mass: Param) -> OperatorExpr:
        raise NotRepresentableError(f"{type(self).__name__} has no symbolic form")

    def axis_values(self, axis: int, x: np.ndarray, mass: Param, bindings) -> np.ndarray:
        raise NotImplementedError

    def domain(self, axis: int) -> Optional[tuple[Fraction, Fraction]]:
        """Hard-wall domain for this axis, or None for a smooth binding."""
        return None

    def to_operator_expr(self, masses: Sequence[Param] | None = None) -> OperatorExpr:
        masses = tuple(masses or ("m",) * self.n_particles)
        out = OperatorExpr()
        for t in range(self.n_particles):
            for ax in self.axes:
                out = out + self.axis_expr(ax, (t, ax), masses[t])
        return out


@dataclass(frozen=True)
class ConstantBox(PotentialModel):
    """Infinite well of side `a` centred at the origin; constant `V0` inside."""

    a: object = "a"
    V0: Param = 0

    def __post_init__(self):
        object.__setattr__(self, "a", _per_axis(self.a))
        object.__setattr__(self, "V0", _param(self.V0))
        for v in self.a:
            _check_positive("box size a", v)

    def axis_expr(self, axis, coord, mass):
        # the constant is attributed to the x axis so it is counted once
        return OperatorExpr.identity(self.V0) if axis == 0 else OperatorExpr()

    def axis_values(self, axis, x, mass, bindings):
        v = param_value(self.V0, bindings) if axis == 0 else 0.0
        return np.full_like(np.asarray(x, dtype=float), v)

    def domain(self, axis):
        if isinstance(self.a[axis], str):
            raise ParameterError("box size must be numeric for a grid domain")
        half = self.a[axis] / 2
        return (-half, half)

    def xi(self, axis: int = 0, mass: Param = 1, hbar: Param = 1, bindings=None) -> float:
        """Energy scale pi^2 hbar^2 / (2 m a^2); eigenvalues are xi * n^2."""
        a = param_value(self.a[axis], bindings)
        return math.pi**2 * param_value(hbar, bindings) ** 2 / (2 * param_value(mass, bindings) * a**2)


@dataclass(frozen=True)
class SymmetricLinear(PotentialModel):
    """V = b_x|x| + b_y|y| + b_z|z|, with |q| written as sign(q) q."""

    b_x: Param = "b_x"
    b_y: Param = "b_y"
    b_z: Param = "b_z"

    def __post_init__(self):
        for name in ("b_x", "b_y", "b_z"):
            object.__setattr__(self, name, _param(getattr(self, name)))

    def slope(self, axis: int) -> Param:
        return (self.b_x, self.b_y, self.b_z)[axis]

    def axis_expr(self, axis, coord, mass):
        form = _coord_form(coord)
        return sign_of(form) * linear(form) * as_coeff(self.slope(axis))

    def axis_values(self, axis, x, mass, bindings):
        return param_value(self.slope(axis), bindings) * np.abs(x)


@dataclass(frozen=True)
class Harmonic(PotentialModel):
    """Isotropic oscillator (m omega^2 / 2)(r - r0)^2."""

    omega: Param = "omega"
    r0: object = 0

    def __post_init__(self):
        object.__setattr__(self, "omega", _param(self.omega))
        object.__setattr__(self, "r0", _per_axis(self.r0))
        _check_positive("omega", self.omega)

    def axis_expr(self, axis, coord, mass):
        q = position(coord[1], coord[0])
        shift = as_coeff(self.r0[axis])
        disp = q - OperatorExpr.identity(shift)
        k = as_coeff(mass) * as_coeff(self.omega) ** 2 * Fraction(1, 2)
        return disp * disp * k

    def axis_values(self, axis, x, mass, bindings):
        k = param_value(mass, bindings) * param_value(self.omega, bindings) ** 2 / 2
        return k * (np.asarray(x) - param_value(self.r0[axis], bindings)) ** 2


@dataclass(frozen=True)
class Morse(PotentialModel):
    """V0 (exp(-2a(x - x0)) - 2 exp(-a(x - x0))) along x.

    The transverse potential is carried only as a tag; it never enters any
    computation, so only x-polarized seeds are supported.
    """

    V0: Param = "V0"
    a: Param = "a"
    x0: Fraction = Fraction(0)
    transverse: str = "unspecified"
    axes = (0,)

    def __post_init__(self):
        object.__setattr__(self, "V0", _param(self.V0))
        object.__setattr__(self, "a", _param(self.a))
        x0 = _param(self.x0)
        if isinstance(x0, str):
            raise ModelError("Morse x0 must be rational so exp(a x0) stays inside the factor")
        object.__setattr__(self, "x0", x0)
        _check_positive("V0", self.V0)
        _check_positive("a", self.a)

    def axis_expr(self, axis, coord, mass):
        if axis != 0:
            raise NotRepresentableError("the transverse Morse potential is unspecified")
        form = _coord_form(coord) - self.x0
        rate = as_coeff(self.a)
        v0 = as_coeff(self.V0)
        return (exp_of(form, rate * -2) - exp_of(form, -rate) * 2) * v0

    def axis_values(self, axis, x, mass, bindings):
        if axis != 0:
            raise NotRepresentableError("the transverse Morse potential is unspecified")
        v0 = param_value(self.V0, bindings)
        a = param_value(self.a, bindings)
        u = np.asarray(x) - float(self.x0)
        return v0 * (np.exp(-2 * a * u) - 2 * np.exp(-a * u))

    def lam(self, mass: Param = "m", hbar: Param = "hbar", bindings=None) -> float:
        """Dimensionless depth sqrt(2 m V0) / (a hbar)."""
        m = param_value(mass, bindings)
        return math.sqrt(2 * m * param_value(self.V0, bindings)) / (
            param_value(self.a, bindings) * param_value(hbar, bindings)
        )

    def bound_state_count(self, mass: Param = "m", hbar: Param = "hbar", bindings=None) -> int:
        lam = self.lam(mass, hbar, bindings)
        if lam <= 0.5:
            raise ModelError("Morse well supports no bound state (need sqrt(2 m V0)/(a hbar) > 1/2)")
        return math.floor(lam - 0.5) + 1

    def energy_level(self, n: int, mass: Param = "m", hbar: Param = "hbar", bindings=None) -> float:
        lam = self.lam(mass, hbar, bindings)
        return -param_value(self.V0, bindings) * (1 - (n + 0.5) / lam) ** 2


@dataclass(frozen=True)
class SeparableAbstract(PotentialModel):
    """Sum of named abstract one-dimensional functions, one per axis."""

    names: tuple[str, str, str] = ("Ux", "Uy", "Uz")

    def axis_expr(self, axis, coord, mass):
        return func(self.names[axis], _coord_form(coord))


@dataclass(frozen=True)
class Separable(PotentialModel):
    """Per-axis composition: each entry's x-profile is used on its axis.

    `None` leaves the axis free.
    """

    x: Optional[PotentialModel] = None
    y: Optional[PotentialModel] = None
    z: Optional[PotentialModel] = None

    def component(self, axis: int) -> Optional[PotentialModel]:
        return (self.x, self.y, self.z)[axis]

    def axis_expr(self, axis, coord, mass):
        comp = self.component(axis)
        return OperatorExpr() if comp is None else comp.axis_expr(0, coord, mass)

    def axis_values(self, axis, x, mass, bindings):
        comp = self.component(axis)
        if comp is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        return comp.axis_values(0, x, mass, bindings)

    def domain(self, axis):
        comp = self.component(axis)
        return None if comp is None else comp.domain(0)


# ---------------------------------------------------------------------------
# two-body couplings


@dataclass(frozen=True)
class AbstractTwoBody:
    """Unspecified reciprocal potential V(r_A - r_B)."""

    name: str = "V"
    axes: tuple[int, ...] = (0, 1, 2)

    def expr(self) -> OperatorExpr:
        forms = [_coord_form((0, ax)) - _coord_form((1, ax)) for ax in self.axes]
        return func(self.name, *forms)


@dataclass(frozen=True)
class HarmonicCoupling:
    """(kappa/2) |r_A - r_B|^2."""

    kappa: Param = "kappa"

    def __post_init__(self):
        object.__setattr__(self, "kappa", _param(self.kappa))

    def expr(self) -> OperatorExpr:
        out = OperatorExpr()
        for ax in range(3):
            d = linear(_coord_form((0, ax)) - _coord_form((1, ax)))
            out = out + d * d
        return out * (as_coeff(self.kappa) * Fraction(1, 2))


@dataclass(frozen=True)
class Coulomb:
    """alpha / |r_A - r_B|; singular, so grid-only."""

    alpha: Param = "alpha"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _param(self.alpha))

    def expr(self) -> OperatorExpr:
        raise NotRepresentableError("Coulomb coupling is singular and not symbolically representable")

    def values(self, r: np.ndarray, bindings=None) -> np.ndarray:
        return param_value(self.alpha, bindings) / np.abs(r)


Coupling = Union[AbstractTwoBody, HarmonicCoupling, Coulomb]


class _PairModel(PotentialModel):
    n_particles = 2
    separable = False

    @property
    def binding(self) -> Optional[PotentialModel]:
        raise NotImplementedError

    def binding_expr(self, masses: Sequence[Param]) -> OperatorExpr:
        b = self.binding
        if b is None:
            return OperatorExpr()
        out = OperatorExpr()
        for t in range(2):
            for ax in b.axes:
                out = out + b.axis_expr(ax, (t, ax), masses[t])
        return out

    def to_operator_expr(self, masses=None, include_coupling: bool = True) -> OperatorExpr:
        masses = tuple(masses or ("m", "m"))
        out = self.binding_expr(masses)
        if include_coupling and self.coupling is not None:
            out = out + self.coupling.expr()
        return out


@dataclass(frozen=True)
class InteractingPair(_PairModel):
    """Two particles in a common one-body binding with a reciprocal coupling."""

    external: Optional[PotentialModel] = None
    coupling: Optional[Coupling] = field(default_factory=AbstractTwoBody)

    @property
    def binding(self):
        return self.external


@dataclass(frozen=True)
class CoupledHarmonicPair(_PairModel):
    """Two particles in a common harmonic well (Hooke's atom family)."""

    omega: Param = "omega"
    coupling: Optional[Coupling] = field(default_factory=AbstractTwoBody)

    def __post_init__(self):
        object.__setattr__(self, "omega", _param(self.omega))
        _check_positive("omega", self.omega)

    @property
    def binding(self):
        return Harmonic(self.omega)


# ---------------------------------------------------------------------------
# Hamiltonian


@dataclass(frozen=True)
class Hamiltonian:
    """Kinetic energy sum p^2 / 2m_t plus a potential model."""

    potential: PotentialModel
    masses: tuple = ()

    def __post_init__(self):
        masses = tuple(_param(m) for m in self.masses) or ("m",) * self.potential.n_particles
        if len(masses) != self.potential.n_particles:
            raise ModelError(
                f"{type(self.potential).__name__} needs {self.potential.n_particles} masses, got {len(masses)}"
            )
        for m in masses:
            _check_positive("mass", m)
        object.__setattr__(self, "masses", masses)

    @property
    def n_particles(self) -> int:
        return self.potential.n_particles

    def kinetic(self) -> OperatorExpr:
        out = OperatorExpr()
        for t, m in enumerate(self.masses):
            inv = as_coeff(m).inverse() * Fraction(1, 2)
            for ax in range(3):
                p = momentum(ax, t)
                out = out + p * p * inv
        return out

    def potential_expr(self) -> OperatorExpr:
        return self.potential.to_operator_expr(self.masses)

    def to_operator_expr(self) -> OperatorExpr:
        return self.kinetic() + self.potential_expr()

    def supports_axis(self, axis: int) -> bool:
        return axis in self.potential.axes

    def axis_values(self, axis: int, x: np.ndarray, bindings=None, particle: int = 0) -> np.ndarray:
        """Grid form of the one-particle potential along one axis."""
        if not self.potential.separable:
            raise NotRepresentableError("grid form is only defined for separable one-particle potentials")
        return self.potential.axis_values(axis, np.asarray(x, dtype=float), self.masses[particle], bindings)


def to_operator_expr(p: PotentialModel, masses: Sequence[Param] | None = None) -> OperatorExpr:
    return p.to_operator_expr(masses)


def dipole_seed(axis, n_particles: int = 1, c: Param = "c") -> OperatorExpr:
    """O_1 = -c * sum_t p_{t, axis}."""
    ax = axis_index(axis)
    out = OperatorExpr()
    for t in range(n_particles):
        out = out + momentum(ax, t)
    return out * (-as_coeff(c))
