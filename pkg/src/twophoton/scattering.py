"""Photon geometry, amplitude assembly, cross sections and energy-law fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DomainError, FitError, NotRepresentableError, PoleError
from .models import Hamiltonian, param_value
from .numerics import ProductState, product_matrix_element, _overlap
from .opalg import OperatorExpr, momentum
from .series import (
    TransitionOperator,
    center_of_mass_content,
    to_center_of_mass,
    transition_operator,
)

POL_EPS = 1e-14


@dataclass(frozen=True)
class ScatteringGeometry:
    """Scattering angle theta in the xz plane and polarization azimuths chi1, chi2."""

    theta: float = 0.0
    chi1: float = 0.0
    chi2: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi + 1e-12:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta}")


def polarization_vectors(g: ScatteringGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors eps1 (incident along z) and eps2 (outgoing at angle theta)."""
    e1 = np.array([math.cos(g.chi1), math.sin(g.chi1), 0.0])
    e2 = np.array(
        [math.cos(g.chi2) * math.cos(g.theta), math.sin(g.chi2), math.cos(g.chi2) * math.sin(g.theta)]
    )
    return e1, e2


@dataclass(frozen=True)
class PhotonPair:
    """Incident and scattered photon energies tied by energy conservation."""

    E1: float
    E_res: float = 0.0

    def __post_init__(self):
        if not self.E1 > 0:
            raise DomainError(f"E1 must be positive, got {self.E1}")
        if self.E2 < 0:
            raise DomainError(f"E2 = E1 - E_res = {self.E2} is negative; the channel is closed")

    @property
    def E2(self) -> float:
        return self.E1 - self.E_res


@dataclass(frozen=True)
class AmplitudeBreakdown:
    thomson: complex
    A12: complex
    A21: complex
    total: complex
    partials: tuple[complex, ...]
    N: int
    m: float
    E1: float
    E2: float


# ---------------------------------------------------------------------------
# series amplitude


def _delta(f: ProductState, i: ProductState) -> int:
    ov = 1.0 + 0j
    for a, b in zip(f.axes, i.axes):
        ov *= _overlap(a, b)
    if abs(ov - 1) < 1e-8:
        return 1
    if abs(ov) < 1e-8:
        return 0
    raise DomainError(f"states are neither identical nor orthogonal (overlap {ov:.3g})")


class SeriesAmplitude:
    """Kramers-Heisenberg amplitude from the commutator series.

    Matrix elements m[j, k, n] = <f| P_j O_n^(k) |i> are computed once, where
    O^(k) is the sequence seeded along axis k and P_j is the total momentum
    along j.  A12 and A21 at any energy are then weighted sums, which is what
    makes the E1 -> -E2 substitution a rebinding.

    For two-particle Hamiltonians the operators are reduced to the centre of
    mass and the states must be centre-of-mass states.
    """

    def __init__(
        self,
        h: Hamiltonian,
        initial: ProductState,
        final: ProductState,
        geometry: ScatteringGeometry = ScatteringGeometry(),
        order: int = 1,
        exact: bool = False,
        bindings: Optional[Mapping[str, object]] = None,
        functions=None,
        damping: float = 0.0,
    ):
        self.h = h
        self.initial = initial
        self.final = final
        self.geometry = geometry
        self.exact = exact
        self.bindings = dict(bindings or {})
        self.damping = float(damping)
        self.eps1, self.eps2 = polarization_vectors(geometry)
        self.N = h.n_particles
        self.mass = param_value(h.masses[0], self.bindings)
        self.c = param_value(self.bindings.get("c", "c"), self.bindings)
        self.delta = _delta(final, initial)
        self.E_res = final.energy - initial.energy

        axes = sorted({a for a in range(3) if abs(self.eps1[a]) > POL_EPS or abs(self.eps2[a]) > POL_EPS})
        self.axes = axes
        self.transitions: dict[int, TransitionOperator] = {}
        self.table: dict[tuple[int, int], np.ndarray] = {}
        for k in axes:
            t = transition_operator(h, 1, order, axis=k, exact=exact)
            self.transitions[k] = t
            for j in axes:
                left = OperatorExpr()
                for particle in range(self.N):
                    left = left + momentum(j, particle)
                vals = []
                for op in t.operators:
                    word = left * op
                    if self.N > 1:
                        if not center_of_mass_content(op):
                            raise NotRepresentableError("operator has relative-coordinate content")
                        word = to_center_of_mass(word)
                    vals.append(product_matrix_element(final, word, initial, self.bindings, functions))
                self.table[(j, k)] = np.array(vals, dtype=complex)
        self.order = max(len(t.operators) for t in self.transitions.values()) if axes else 0

    def _weights(self, k: int, E: complex) -> np.ndarray:
        return np.array(self.transitions[k].weights(E, self.bindings), dtype=complex)

    def _amplitude(self, E: complex, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Per-order contributions (1/c) sum_jk left_j right_k w_n(E) m[j,k,n]."""
        out = np.zeros(self.order, dtype=complex)
        for (j, k), vals in self.table.items():
            pref = left[j] * right[k]
            if pref == 0:
                continue
            w = self._weights(k, E)
            out[: len(vals)] += pref * w * vals
        return out / self.c

    def A12_orders(self, E1: float) -> np.ndarray:
        return self._amplitude(E1 + 1j * self.damping, self.eps2, self.eps1)

    def A21_orders(self, E2: float) -> np.ndarray:
        return self._amplitude(-E2 + 1j * self.damping, self.eps1, self.eps2)

    def A12(self, E1: float) -> complex:
        return complex(self.A12_orders(E1).sum())

    def A21(self, E2: float) -> complex:
        return complex(self.A21_orders(E2).sum())

    @property
    def thomson(self) -> complex:
        return self.N * float(self.eps1 @ self.eps2) * self.delta

    def breakdown(self, E1: float) -> AmplitudeBreakdown:
        pair = PhotonPair(E1, self.E_res)
        a12 = self.A12_orders(pair.E1)
        a21 = self.A21_orders(pair.E2)
        th = self.thomson
        partials = [th]
        if not self.exact:
            run = np.cumsum(a12 + a21)
            partials += [th - v / self.mass for v in run]
        A12, A21 = complex(a12.sum()), complex(a21.sum())
        total = th - (A12 + A21) / self.mass
        if self.exact:
            partials.append(total)
        return AmplitudeBreakdown(th, A12, A21, total, tuple(partials), self.N, self.mass, pair.E1, pair.E2)


def amplitude_A12(s: SeriesAmplitude, E1: float) -> complex:
    return s.A12(E1)


def amplitude_A21(s: SeriesAmplitude, E2: float) -> complex:
    return s.A21(E2)


def total_amplitude(s: SeriesAmplitude, E1: float) -> AmplitudeBreakdown:
    return s.breakdown(E1)


# ---------------------------------------------------------------------------
# closed forms and cross sections


def harmonic_rayleigh_closed(E: float, omega: float, geometry: ScatteringGeometry = ScatteringGeometry(), hbar: float = 1.0) -> complex:
    """Exact harmonic Rayleigh amplitude (eps1.eps2)(1 + (hbar w)^2 / (E^2 - (hbar w)^2))."""
    if E < 0:
        raise DomainError("photon energy must be nonnegative")
    lam = (hbar * omega) ** 2
    if E * E == lam:
        raise PoleError(f"zero-width resonance at E = {hbar * omega}")
    e1, e2 = polarization_vectors(geometry)
    return complex(float(e1 @ e2) * (1 + lam / (E * E - lam)))


def differential_cross_section(b, E1: float, E2: Optional[float] = None, r_e: float = 1.0) -> float:
    """r_e^2 (E2/E1) |M|^2 for a breakdown or a bare amplitude."""
    if not E1 > 0:
        raise DomainError("E1 must be positive")
    if isinstance(b, AmplitudeBreakdown):
        M = b.total
        E2 = b.E2 if E2 is None else E2
    else:
        M = complex(b)
        E2 = E1 if E2 is None else E2
    return float(r_e**2 * (E2 / E1) * abs(M) ** 2)


# ---------------------------------------------------------------------------
# energy laws


def _law_basis(E: np.ndarray, e_res: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    E2 = E - e_res
    u = 1 / E2 - 1 / E
    v = 1 / E2**2 + 1 / E**2
    return u, v, E2 / E


@dataclass(frozen=True)
class EnergyLawFit:
    c1: float
    c2: float
    residual: float
    window: tuple[float, float]
    order: int


class EnergyLawRegressor(BaseEstimator, RegressorMixin):
    """Least-squares fit of sigma(E) to |c1 (1/E2 - 1/E1) + c2 (1/E2^2 + 1/E1^2)|^2.

    With `flux_factor` the model carries the E2/E1 prefactor of the cross
    section.  `order=1` fixes c2 = 0.
    """

    def __init__(self, order: int = 1, e_res: float = 0.0, flux_factor: bool = True):
        self.order = order
        self.e_res = e_res
        self.flux_factor = flux_factor

    def _design(self, E):
        u, v, flux = _law_basis(E, self.e_res)
        s = flux if self.flux_factor else np.ones_like(E)
        return u, v, s

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=8, y_numeric=True)
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        E = X[:, 0]
        if np.any(E <= self.e_res) or np.any(E <= 0):
            raise FitError("all energies must lie above the resonance energy")
        u, v, s = self._design(E)
        if self.order == 1:
            A = (s * u * u)[:, None]
        else:
            A = np.column_stack([s * u * u, 2 * s * u * v, s * v * v])
        scale = np.linalg.norm(A, axis=0)
        if np.any(scale == 0) or np.linalg.matrix_rank(A / scale, tol=1e-10) < A.shape[1]:
            raise FitError("degenerate energy window: the normal equations are singular")
        q, *_ = np.linalg.lstsq(A / scale, y, rcond=None)
        q = q / scale
        c1 = math.sqrt(max(q[0], 0.0))
        c2 = q[1] / c1 if self.order == 2 and c1 > 0 else 0.0
        if self.order == 2:
            res = least_squares(lambda c: (s * (c[0] * u + c[1] * v) ** 2 - y) / max(np.abs(y).max(), 1e-300), [c1, c2])
            c1, c2 = res.x
            if c1 < 0:
                c1, c2 = -c1, -c2
        self.coef_ = np.array([c1, c2])
        pred = self._model(E)
        self.residual_ = float(np.linalg.norm(pred - y) / np.linalg.norm(y))
        self.window_ = (float(E.min()), float(E.max()))
        return self

    def _model(self, E):
        u, v, s = self._design(E)
        c1, c2 = self.coef_
        return s * (c1 * u + c2 * v) ** 2

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return self._model(X[:, 0])

    def result(self) -> EnergyLawFit:
        check_is_fitted(self, "coef_")
        return EnergyLawFit(float(self.coef_[0]), float(self.coef_[1]), self.residual_, self.window_, self.order)


def fit_energy_law(E: Sequence[float], sigma: Sequence[float], e_res: float, order: int = 1, flux_factor: bool = True) -> EnergyLawFit:
    reg = EnergyLawRegressor(order=order, e_res=e_res, flux_factor=flux_factor)
    reg.fit(np.asarray(E, dtype=float).reshape(-1, 1), np.asarray(sigma, dtype=float))
    return reg.result()


class TwoPhotonAmplitude(BaseEstimator):
    """Estimator wrapper: `fit` precomputes matrix elements, `predict` maps E1 to M."""

    def __init__(
        self,
        hamiltonian=None,
        initial=None,
        final=None,
        theta: float = 0.0,
        chi1: float = 0.0,
        chi2: float = 0.0,
        order: int = 1,
        exact: bool = False,
        bindings=None,
        damping: float = 0.0,
    ):
        self.hamiltonian = hamiltonian
        self.initial = initial
        self.final = final
        self.theta = theta
        self.chi1 = chi1
        self.chi2 = chi2
        self.order = order
        self.exact = exact
        self.bindings = bindings
        self.damping = damping

    def fit(self, X=None, y=None):
        if self.hamiltonian is None or self.initial is None:
            raise ValueError("hamiltonian and initial state are required")
        final = self.final if self.final is not None else self.initial
        geometry = ScatteringGeometry(self.theta, self.chi1, self.chi2)
        self.series_ = SeriesAmplitude(
            self.hamiltonian, self.initial, final, geometry, self.order, self.exact, self.bindings, damping=self.damping
        )
        return self

    def _energies(self, X) -> np.ndarray:
        check_is_fitted(self, "series_")
        return check_array(np.asarray(X, dtype=float).reshape(-1, 1))[:, 0]

    def predict(self, X) -> np.ndarray:
        return np.array([self.series_.breakdown(E).total for E in self._energies(X)])

    def predict_cross_section(self, X, r_e: float = 1.0) -> np.ndarray:
        return np.array(
            [differential_cross_section(self.series_.breakdown(E), E, r_e=r_e) for E in self._energies(X)]
        )

    def transform(self, X) -> np.ndarray:
        """Per-order partial amplitudes M^(0..n), one row per energy."""
        return np.array([self.series_.breakdown(E).partials for E in self._energies(X)])
