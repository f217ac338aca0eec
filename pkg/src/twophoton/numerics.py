"""Grid eigensolvers, operator application and matrix elements.

Wavefunctions live on the interior points of a uniform grid with Dirichlet
walls at both ends.  Derivatives use central stencils with odd reflection
across each wall, which is the exact continuation of a function vanishing
there.  Quadrature is the trapezoid rule, which reduces to ``h * sum`` because
the wall values are zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import sympy

from .errors import ConfigurationError, GridMismatchError, NotRepresentableError, ParameterError
from .models import REFERENCE_UNITS, Hamiltonian, Morse, PotentialModel, param_value
from .opalg import Coeff, Exp, Fn, Key, LinearForm, OperatorExpr, Pow, Sgn

MIN_POINTS = 512
MAX_RATE_STEP = 0.1

_D1 = {
    2: [Fraction(1, 2)],
    4: [Fraction(2, 3), Fraction(-1, 12)],
    6: [Fraction(3, 4), Fraction(-3, 20), Fraction(1, 60)],
    8: [Fraction(4, 5), Fraction(-1, 5), Fraction(4, 105), Fraction(-1, 280)],
}
_D2 = {
    2: [Fraction(-2), Fraction(1)],
    4: [Fraction(-5, 2), Fraction(4, 3), Fraction(-1, 12)],
    6: [Fraction(-49, 18), Fraction(3, 2), Fraction(-3, 20), Fraction(1, 90)],
    8: [Fraction(-205, 72), Fraction(8, 5), Fraction(-1, 5), Fraction(8, 315), Fraction(-1, 560)],
}


class PrincipalValueWarning(UserWarning):
    """A sign factor acts on a state that is not odd about the origin."""


@dataclass(frozen=True)
class Grid1D:
    """`n` interior points strictly between Dirichlet walls at x_min and x_max."""

    x_min: float
    x_max: float
    n: int
    stencil: int = 4

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigurationError("grid needs x_max > x_min")
        if self.n < 3:
            raise ConfigurationError("grid needs at least 3 points")
        if self.stencil not in _D1:
            raise ConfigurationError(f"stencil order must be one of {sorted(_D1)}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n + 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(1, self.n + 1)

    def check(self, rates: Sequence[float] = (), min_points: int = MIN_POINTS):
        """Raise ConfigurationError when the grid is too coarse."""
        if self.n < min_points:
            raise ConfigurationError(f"grid has {self.n} points; at least {min_points} are required")
        worst = max((abs(r) for r in rates), default=0.0)
        if self.h * worst >= MAX_RATE_STEP:
            raise ConfigurationError(
                f"h * max|rate| = {self.h * worst:.3g} >= {MAX_RATE_STEP}; exponential factors are unresolved"
            )


def _stencil_matrix(n: int, weights: list[Fraction], odd: bool) -> sp.csr_matrix:
    """Central stencil with odd reflection across walls at indices -1 and n."""
    offsets: dict[int, float] = {}
    if odd:
        for j, w in enumerate(weights, start=1):
            offsets[j] = float(w)
            offsets[-j] = -float(w)
    else:
        offsets[0] = float(weights[0])
        for j, w in enumerate(weights[1:], start=1):
            offsets[j] = offsets[-j] = float(w)
    m = sp.diags(
        [np.full(n - abs(o), w) for o, w in offsets.items()], list(offsets), shape=(n, n), format="lil"
    )
    width = max(offsets)
    for i in sorted(set(range(min(width, n))) | set(range(max(n - width, 0), n))):
        for o, w in offsets.items():
            t = i + o
            # the value at wall + j equals minus the value at wall - j
            if t < -1:
                m[i, -2 - t] -= w
            elif t > n:
                m[i, 2 * n - t] -= w
    return m.tocsr()


@lru_cache(maxsize=32)
def derivative_matrices(grid: Grid1D) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(D1, D2) for the grid's stencil order."""
    n, h = grid.n, grid.h
    d1 = _stencil_matrix(n, _D1[grid.stencil], odd=True) / h
    d2 = _stencil_matrix(n, _D2[grid.stencil], odd=False) / h**2
    return d1.tocsr(), d2.tocsr()


@dataclass(frozen=True, eq=False)
class GridWavefunction:
    grid: Grid1D
    values: np.ndarray
    flags: frozenset = frozenset()

    @property
    def norm(self) -> float:
        return math.sqrt(self.grid.h * float(np.vdot(self.values, self.values).real))

    def normalized(self) -> "GridWavefunction":
        return GridWavefunction(self.grid, self.values / self.norm, self.flags)

    def __add__(self, o):
        _same_grid(self, o)
        return GridWavefunction(self.grid, self.values + o.values, self.flags | o.flags)

    def scaled(self, c) -> "GridWavefunction":
        return GridWavefunction(self.grid, c * self.values, self.flags)


@dataclass(frozen=True, eq=False)
class EigenPair:
    energy: float
    state: GridWavefunction
    index: int
    residual: float = 0.0


def _same_grid(a: GridWavefunction, b: GridWavefunction):
    if a.grid != b.grid:
        raise GridMismatchError(f"states live on different grids: {a.grid} vs {b.grid}")


def _fix_sign(v: np.ndarray) -> np.ndarray:
    """Make the outermost significant lobe on the right positive."""
    mags = np.abs(v)
    idx = np.nonzero(mags > 1e-3 * mags.max())[0][-1]
    return v if v[idx] > 0 else -v


def _potential_rates(potential, bindings) -> list[float]:
    if isinstance(potential, Morse):
        return [2 * param_value(potential.a, bindings)]
    comp = getattr(potential, "x", None)
    if isinstance(comp, Morse):
        return [2 * param_value(comp.a, bindings)]
    return []


@dataclass(eq=False)
class AxisBasis:
    """Eigenpairs of a one-dimensional grid Hamiltonian plus its operators."""

    grid: Grid1D
    energies: np.ndarray
    vectors: np.ndarray  # columns normalized so that h * sum |v|^2 = 1
    potential_values: np.ndarray
    mass: float
    hbar: float

    def __len__(self):
        return len(self.energies)

    def state(self, k: int) -> GridWavefunction:
        return GridWavefunction(self.grid, self.vectors[:, k])

    def eigenpair(self, k: int) -> EigenPair:
        psi = self.state(k)
        r = self.apply_h(psi.values) - self.energies[k] * psi.values
        return EigenPair(float(self.energies[k]), psi, k, float(np.linalg.norm(r) / np.linalg.norm(psi.values)))

    def apply_h(self, v: np.ndarray) -> np.ndarray:
        _, d2 = derivative_matrices(self.grid)
        return -(self.hbar**2 / (2 * self.mass)) * (d2 @ v) + self.potential_values * v

    def momentum_matrix(self) -> np.ndarray:
        """<nu| p |mu> in this basis."""
        d1, _ = derivative_matrices(self.grid)
        return -1j * self.hbar * self.grid.h * (self.vectors.T @ (d1 @ self.vectors))


def _to_lower_banded(m: sp.csr_matrix, bw: int) -> np.ndarray:
    n = m.shape[0]
    band = np.zeros((bw + 1, n))
    for k in range(bw + 1):
        band[k, : n - k] = m.diagonal(-k)
    return band


def grid_hamiltonian_banded(potential_values, grid: Grid1D, mass: float, hbar: float) -> np.ndarray:
    _, d2 = derivative_matrices(grid)
    hmat = -(hbar**2 / (2 * mass)) * d2 + sp.diags(potential_values)
    return _to_lower_banded(hmat.tocsr(), grid.stencil // 2)


def _model_and_mass(potential, mass, bindings):
    if isinstance(potential, Hamiltonian):
        return potential.potential, param_value(potential.masses[0], bindings)
    return potential, param_value(mass, bindings)


_BASIS_CACHE: dict = {}


def solve_axis(
    potential: Union[PotentialModel, Hamiltonian],
    grid: Grid1D,
    count: Optional[int] = None,
    *,
    axis: int = 0,
    mass=1,
    bindings: Optional[Mapping[str, object]] = None,
    min_points: int = MIN_POINTS,
) -> AxisBasis:
    """Lowest `count` eigenpairs (all when None) of the grid Hamiltonian along one axis.

    Results are memoized; the returned basis must be treated as read-only.
    """
    bindings = dict(bindings or {})
    key = (potential, grid, count, axis, mass, min_points, tuple(sorted((k, str(v)) for k, v in bindings.items())))
    if key not in _BASIS_CACHE:
        _BASIS_CACHE[key] = _solve_axis(potential, grid, count, axis, mass, bindings, min_points)
    return _BASIS_CACHE[key]


def _solve_axis(potential, grid, count, axis, mass, bindings, min_points) -> AxisBasis:
    model, m = _model_and_mass(potential, mass, bindings)
    hbar = float(param_value(bindings.get("hbar", 1), bindings))
    grid.check(_potential_rates(model, bindings), min_points=min_points)
    dom = model.domain(axis)
    if dom is not None and (abs(grid.x_min - float(dom[0])) > 1e-12 or abs(grid.x_max - float(dom[1])) > 1e-12):
        raise ConfigurationError(f"grid must span the hard-wall domain {float(dom[0])}..{float(dom[1])}")
    v = model.axis_values(axis, grid.x, m, bindings)
    band = grid_hamiltonian_banded(v, grid, m, hbar)
    if count is None or count >= grid.n:
        w, vec = scipy.linalg.eig_banded(band, lower=True)
    else:
        w, vec = scipy.linalg.eig_banded(band, lower=True, select="i", select_range=(0, count - 1))
    vec = vec / math.sqrt(grid.h)
    for k in range(vec.shape[1]):
        vec[:, k] = _fix_sign(vec[:, k])
    return AxisBasis(grid, w, vec, v, m, hbar)


def eigensolve_fd(
    potential: Union[PotentialModel, Hamiltonian],
    grid: Grid1D,
    count: Optional[int] = None,
    **kwargs,
) -> list[EigenPair]:
    """Lowest `count` eigenpairs of the finite-difference Hamiltonian."""
    basis = solve_axis(potential, grid, count, **kwargs)
    return [basis.eigenpair(k) for k in range(len(basis))]


def default_grid(potential: PotentialModel, axis: int = 0, n: int = 4096, bindings=None, mass=1, stencil: int = 4) -> Grid1D:
    """Grid covering the bound states of interest for each model family."""
    from .models import Harmonic, Separable, SymmetricLinear

    bindings = bindings or {}
    if isinstance(potential, Separable):
        comp = potential.component(axis)
        return default_grid(comp, 0, n, bindings, mass, stencil) if comp is not None else Grid1D(-20.0, 20.0, n, stencil)
    dom = potential.domain(axis)
    if dom is not None:
        return Grid1D(float(dom[0]), float(dom[1]), n, stencil)
    if isinstance(potential, Morse):
        if not bindings and isinstance(potential.a, str):
            bindings = REFERENCE_UNITS
        a = param_value(potential.a, bindings)
        return Grid1D(float(potential.x0) - 10.0 / (3 * a), float(potential.x0) + 60.0 / (3 * a), n, stencil)
    m = param_value(mass, bindings)
    hbar = param_value(bindings.get("hbar", 1), bindings)
    if isinstance(potential, Harmonic):
        length = math.sqrt(hbar / (m * param_value(potential.omega, bindings)))
        c = param_value(potential.r0[axis], bindings)
        return Grid1D(c - 14 * length, c + 14 * length, n, stencil)
    if isinstance(potential, SymmetricLinear):
        b = param_value(potential.slope(axis), bindings)
        scale = (hbar**2 / (2 * m * b)) ** (1 / 3)
        return Grid1D(-40 * scale, 40 * scale, n, stencil)
    return Grid1D(-20.0, 20.0, n, stencil)


def morse_ground_state(grid: Grid1D, model: Optional[Morse] = None, bindings=None, mass=1) -> GridWavefunction:
    """Analytic Morse ground state exp(-lam e^{-a u}) exp(-(lam - 1/2) a u), normalized on the grid."""
    model = model or Morse(1, Fraction(1, 3), 0)
    bindings = dict(bindings or {})
    hbar = bindings.get("hbar", 1)
    lam = model.lam(mass, hbar, bindings)
    a = param_value(model.a, bindings)
    u = grid.x - float(model.x0)
    log_psi = -lam * np.exp(-a * u) - (lam - 0.5) * a * u
    psi = np.exp(log_psi - log_psi.max())
    return GridWavefunction(grid, psi.astype(complex)).normalized()


def morse_ground_state_exact(x: np.ndarray) -> np.ndarray:
    """Closed-form normalized Morse ground state in reference units."""
    s2 = math.sqrt(2)
    log_norm = (9 / s2 - 0.75) * math.log(2) + (3 * s2 - 1) * math.log(3)
    log_norm += 0.5 * (math.log(6 * s2 - 1) - math.lgamma(6 * s2))
    return np.exp(log_norm + x / 3 - 3 * s2 * np.exp(-x / 3) - (x / 3) * (0.5 + 3 * s2))


# ---------------------------------------------------------------------------
# operator application


def _scalar(c: Coeff) -> complex:
    try:
        return complex(c.scalar())
    except ParameterError as exc:
        raise ParameterError(f"unbound parameters {sorted(c.free_params())}; bind them before numeric use") from exc


def _form_values(form: LinearForm, x: np.ndarray) -> np.ndarray:
    if len(form.coeffs) != 1:
        raise NotRepresentableError(f"form {form} couples several coordinates")
    return float(form.coeffs[0][1]) * x + float(form.offset)


def position_values(
    pos, x: np.ndarray, bindings=None, functions: Optional[Mapping[str, Callable]] = None
) -> np.ndarray:
    """Pointwise values of a product of position factors along one coordinate."""
    out = np.ones_like(x, dtype=complex)
    for f, e in pos:
        if isinstance(f, Pow):
            out = out * x**e
        elif isinstance(f, Exp):
            rate = _scalar(Coeff.monomial(f.mono, e).subs(bindings or {})).real
            out = out * np.exp(rate * _form_values(f.form, x))
        elif isinstance(f, Sgn):
            out = out * np.sign(_form_values(f.form, x)) ** e
        elif isinstance(f, Fn):
            if not functions or f.name not in functions:
                raise ParameterError(f"abstract function {f.name!r} has no numeric binding")
            args = [_form_values(g, x) for g in f.forms]
            out = out * functions[f.name](f.orders, *args) ** e
    return out


def evaluate_position_expr(expr: OperatorExpr, x: np.ndarray, bindings=None, functions=None) -> np.ndarray:
    """Values of a momentum-free, single-coordinate expression on points x."""
    expr = expr.subs(bindings or {})
    out = np.zeros_like(np.asarray(x, dtype=float), dtype=complex)
    for (pos, mom), c in expr.terms():
        if mom:
            raise ValueError("expression contains momenta")
        out = out + _scalar(c) * position_values(pos, np.asarray(x, dtype=float), bindings, functions)
    return out


def _momentum_power(grid: Grid1D, values: np.ndarray, n: int, hbar: float) -> np.ndarray:
    d1, d2 = derivative_matrices(grid)
    out = values
    for _ in range(n // 2):
        out = -(hbar**2) * (d2 @ out)
    if n % 2:
        out = -1j * hbar * (d1 @ out)
    return out


def _is_odd(psi: GridWavefunction) -> bool:
    g = psi.grid
    if abs(g.x_min + g.x_max) > 1e-12 * (g.x_max - g.x_min):
        return False
    v = psi.values
    return np.linalg.norm(v + v[::-1]) <= 1e-8 * np.linalg.norm(v)


def apply_operator(
    op: OperatorExpr,
    psi: GridWavefunction,
    bindings: Optional[Mapping[str, object]] = None,
    functions: Optional[Mapping[str, Callable]] = None,
) -> GridWavefunction:
    """Apply a one-coordinate operator: momenta by finite differences, positions pointwise."""
    bindings = dict(bindings or {})
    hbar = float(param_value(bindings.get("hbar", 1), bindings))
    op = op.subs(bindings)
    coords = op.coordinates()
    if len(coords) > 1:
        raise NotRepresentableError(f"operator acts on several coordinates {sorted(coords)}")
    x = psi.grid.x
    out = np.zeros_like(psi.values, dtype=complex)
    flags = set(psi.flags)
    powers: dict[int, np.ndarray] = {0: psi.values}
    for (pos, mom), c in op.terms():
        n = mom[0][1] if mom else 0
        if n not in powers:
            powers[n] = _momentum_power(psi.grid, psi.values, n, hbar)
        if any(isinstance(f, Sgn) for f, _ in pos) and psi.grid.x_min < 0 < psi.grid.x_max:
            if not _is_odd(psi):
                flags.add("principal-value")
                warnings.warn(
                    "sign factor on a state that is not odd about the origin; the result is a principal value",
                    PrincipalValueWarning,
                    stacklevel=2,
                )
        out = out + _scalar(c) * position_values(pos, x, bindings, functions) * powers[n]
    return GridWavefunction(psi.grid, out, frozenset(flags))


def inner(f: GridWavefunction, g: GridWavefunction) -> complex:
    _same_grid(f, g)
    return complex(f.grid.h * np.vdot(f.values, g.values))


def matrix_element(
    f: GridWavefunction,
    op: OperatorExpr,
    i: GridWavefunction,
    bindings=None,
    functions=None,
) -> complex:
    """<f| op |i> by trapezoid quadrature."""
    _same_grid(f, i)
    return inner(f, apply_operator(op, i, bindings, functions))


# ---------------------------------------------------------------------------
# harmonic ladder algebra


@dataclass(frozen=True)
class LadderState:
    """Oscillator eigenstate |n> along one axis."""

    n: int
    omega: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.n < 0 or int(self.n) != self.n:
            raise ValueError("quantum numbers are nonnegative integers")


@dataclass(frozen=True)
class HarmonicBasisState:
    """Isotropic oscillator eigenstate |n_x, n_y, n_z>."""

    n: tuple[int, int, int] = (0, 0, 0)
    omega: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if len(self.n) != 3 or any(k < 0 or int(k) != k for k in self.n):
            raise ValueError("quantum numbers are three nonnegative integers")

    def axis(self, j: int) -> LadderState:
        return LadderState(self.n[j], self.omega, self.mass, self.hbar)


LadderWord = Sequence[Union[str, tuple]]


def _ladder_apply(token, state: dict, gamma) -> dict:
    name, axis = (token, 0) if isinstance(token, str) else (token[0], token[1])
    out: dict = {}

    def add(key, val):
        out[key] = sympy.expand(out.get(key, 0) + val)

    half = sympy.Rational(1, 2)
    for key, amp in state.items():
        n = key[axis]
        up = key[:axis] + (n + 1,) + key[axis + 1:]
        down = key[:axis] + (n - 1,) + key[axis + 1:]
        raise_amp = amp * sympy.sqrt(n + 1)
        lower_amp = amp * sympy.sqrt(n) if n > 0 else 0
        if name == "a":
            if n > 0:
                add(down, lower_amp)
        elif name == "ad":
            add(up, raise_amp)
        elif name == "adg":  # perturbed creation operator
            add(up, half * (1 + gamma) * raise_amp)
            if n > 0:
                add(down, half * (1 - gamma) * lower_amp)
        elif name == "ag":  # its adjoint for real gamma
            add(up, half * (1 - gamma) * raise_amp)
            if n > 0:
                add(down, half * (1 + gamma) * lower_amp)
        else:
            raise ValueError(f"unknown ladder operator {name!r}")
    return {k: v for k, v in out.items() if v != 0}


def _as_key(s) -> tuple:
    if isinstance(s, HarmonicBasisState):
        return tuple(s.n)
    if isinstance(s, LadderState):
        return (s.n, 0, 0)
    if isinstance(s, int):
        return (s, 0, 0)
    return tuple(s)


def ladder_matrix_element(f, word, i, gamma=0):
    """Exact <f| word |i> for words over a, ad (a dagger), adg and ag.

    `word` is a list of tokens (rightmost acts first) or a list of
    ``(coefficient, tokens)`` pairs.  A token is a name or ``(name, axis)``.
    ``adg`` is the perturbed creation operator ((1+g) a^dag + (1-g) a)/2 and
    ``ag`` its adjoint for real g.
    """
    gamma = sympy.sympify(gamma)
    terms = word if word and isinstance(word[0], tuple) and not isinstance(word[0][0], str) else [(1, word)]
    fk, ik = _as_key(f), _as_key(i)
    total = sympy.Integer(0)
    for coef, tokens in terms:
        state = {ik: sympy.Integer(1)}
        for tok in reversed(list(tokens)):
            state = _ladder_apply(tok, state, gamma)
        total += sympy.sympify(coef) * state.get(fk, 0)
    return sympy.simplify(total)


def _fock_ops(dim: int, st: LadderState) -> tuple[np.ndarray, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    ad = a.T
    s = math.sqrt(st.hbar / (2 * st.mass * st.omega))
    x = s * (a + ad)
    p = 1j * math.sqrt(st.mass * st.hbar * st.omega / 2) * (ad - a)
    return x, p


def ladder_word_element(f: LadderState, op: OperatorExpr, i: LadderState, bindings=None) -> complex:
    """<f| op |i> for a polynomial one-coordinate operator via ladder matrices."""
    op = op.subs(bindings or {})
    degree = 0
    for (pos, mom), _ in op.terms():
        d = sum(n for _, n in mom)
        for fac, e in pos:
            if not isinstance(fac, Pow):
                raise NotRepresentableError("ladder evaluation handles polynomial words only")
            d += e
        degree = max(degree, d)
    dim = max(f.n, i.n) + degree + 2
    x, p = _fock_ops(dim, i)
    ket = np.zeros(dim, dtype=complex)
    ket[i.n] = 1
    total = 0j
    for (pos, mom), c in op.terms():
        v = ket
        for _, n in mom:
            for _ in range(n):
                v = p @ v
        for _, e in pos:
            for _ in range(e):
                v = x @ v
        total += _scalar(c) * v[f.n]
    return total


# ---------------------------------------------------------------------------
# product states and factorized matrix elements

AxisState = Union[GridWavefunction, LadderState, None]


@dataclass(frozen=True, eq=False)
class ProductState:
    """Separable one-particle state; `None` marks a spectator axis."""

    axes: tuple[AxisState, AxisState, AxisState]
    energy: float = 0.0
    label: tuple = ()

    @staticmethod
    def harmonic(s: HarmonicBasisState) -> "ProductState":
        energy = s.hbar * s.omega * (sum(s.n) + 1.5)
        return ProductState(tuple(s.axis(j) for j in range(3)), energy, tuple(s.n))


def _axis_element(f: AxisState, op: OperatorExpr, i: AxisState, bindings, functions) -> complex:
    if f is None or i is None:
        if not (f is None and i is None):
            raise ValueError("spectator axes must be spectators in both states")
        if op.coordinates():
            raise NotRepresentableError("an operator acts on a spectator axis")
        return complex(op.coefficient(((), ())).scalar()) if op else 0j
    if isinstance(f, GridWavefunction) and isinstance(i, GridWavefunction):
        return matrix_element(f, op, i, bindings, functions)
    if isinstance(f, LadderState) and isinstance(i, LadderState):
        return ladder_word_element(f, op, i, bindings)
    raise TypeError("states on one axis must share a backend")


def _overlap(f: AxisState, i: AxisState) -> complex:
    if f is None and i is None:
        return 1.0
    if f is i:
        # basis states are normalized by construction
        return 1.0
    if isinstance(f, LadderState):
        return 1.0 if f.n == i.n else 0.0
    return inner(f, i)


def product_matrix_element(
    f: ProductState,
    op: OperatorExpr,
    i: ProductState,
    bindings=None,
    functions=None,
) -> complex:
    """<f| op |i> for separable states, factorizing every word over axes."""
    op = op.subs(bindings or {})
    overlaps = [None, None, None]
    total = 0j
    for (pos, mom), c in op.terms():
        per_axis: dict[int, tuple[list, list]] = {}
        for fac, e in pos:
            if isinstance(fac, Pow):
                coords = {fac.coord}
            elif isinstance(fac, Fn):
                coords = {cc for g in fac.forms for cc in g.coords()}
            else:
                coords = set(fac.form.coords())
            if len(coords) != 1:
                raise NotRepresentableError("word does not factorize over axes")
            (particle, ax), = coords
            if particle != 0:
                raise NotRepresentableError("product states describe a single particle")
            per_axis.setdefault(ax, ([], []))[0].append((fac, e))
        for (particle, ax), n in mom:
            if particle != 0:
                raise NotRepresentableError("product states describe a single particle")
            per_axis.setdefault(ax, ([], []))[1].append(((particle, ax), n))
        value = _scalar(c)
        for ax in range(3):
            if ax in per_axis:
                p_fac, m_fac = per_axis[ax]
                key: Key = (tuple(p_fac), tuple(m_fac))
                sub = OperatorExpr({key: Coeff.const(1)})
                value *= _axis_element(f.axes[ax], sub, i.axes[ax], bindings, functions)
            else:
                if overlaps[ax] is None:
                    overlaps[ax] = _overlap(f.axes[ax], i.axes[ax])
                value *= overlaps[ax]
            if value == 0:
                break
        total += value
    return total
