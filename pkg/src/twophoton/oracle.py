"""Brute-force amplitudes: sum over intermediate states and resolvent solves.

Both oracles work on the finite-difference Hamiltonian of each axis.  With the
full grid basis the sum over states is the exact resolvent of that
Hamiltonian, so the two oracles agree to rounding error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import scipy.linalg

from .errors import ResonanceError
from .numerics import AxisBasis, GridWavefunction, ProductState, derivative_matrices, grid_hamiltonian_banded
from .scattering import ScatteringGeometry, SeriesAmplitude, polarization_vectors

GUARD_BAND = 1e-6
SELECTION_EPS = 1e-9
POL_EPS = 1e-14

State = tuple  # per-axis eigenstate index, or None for a spectator axis


class SeparableSpectrum:
    """Per-axis grid eigenbases of a separable one-particle Hamiltonian."""

    def __init__(self, bases: Mapping[int, AxisBasis]):
        self.bases = dict(bases)
        self._cols: dict = {}
        self._rows: dict = {}

    def energy(self, s: State) -> float:
        return float(sum(self.bases[a].energies[k] for a, k in enumerate(s) if k is not None))

    def product_state(self, s: State) -> ProductState:
        axes = tuple(None if k is None else self.bases[a].state(k) for a, k in enumerate(s))
        return ProductState(axes, self.energy(s), tuple(s))

    def p_column(self, axis: int, i: int) -> np.ndarray:
        """<nu| p |i> for every basis state nu."""
        key = (axis, i)
        if key not in self._cols:
            b = self.bases[axis]
            d1, _ = derivative_matrices(b.grid)
            self._cols[key] = -1j * b.hbar * b.grid.h * (b.vectors.T @ (d1 @ b.vectors[:, i]))
        return self._cols[key]

    def p_row(self, axis: int, f: int) -> np.ndarray:
        """<f| p |nu> for every basis state nu."""
        key = (axis, f)
        if key not in self._rows:
            b = self.bases[axis]
            d1, _ = derivative_matrices(b.grid)
            self._rows[key] = -1j * b.hbar * b.grid.h * ((d1.T @ b.vectors[:, f]) @ b.vectors)
        return self._rows[key]

    def p_element(self, axis: int, f: int, i: int) -> complex:
        return complex(self.p_column(axis, i)[f])


def _check_denominator(d, guard: float, what):
    if abs(d) < guard:
        raise ResonanceError(f"energy denominator {d:.3g} inside guard band at intermediate state {what}", what, d)


def _guard(denom: np.ndarray, num: np.ndarray, guard: float, axis: int):
    """Refuse resonant denominators unless the dipole numerator vanishes there."""
    bad = np.nonzero(np.abs(denom) < guard)[0]
    scale = np.abs(num).max() if num.size else 0.0
    for nu in bad:
        if abs(num[nu]) > SELECTION_EPS * scale:
            _check_denominator(denom[nu], guard, (axis, int(nu)))
    # dipole-forbidden resonant states drop out of the sum
    num[bad] = 0.0
    denom[bad] = 1.0


def _weighted_sum(
    spec: SeparableSpectrum,
    f: State,
    i: State,
    E: complex,
    left: np.ndarray,
    right: np.ndarray,
    count: Optional[int],
    guard: float,
) -> tuple[complex, complex]:
    """sum_jk left_j right_k sum_nu <f|p_j|nu><nu|p_k|i> / (E_nu - E_i - E).

    Returns the value and the contribution of the last tenth of the included
    states on same-axis sums (saturation diagnostic).
    """
    total = 0j
    tail = 0j
    axes = range(len(i))
    for j in axes:
        for k in axes:
            pref = left[j] * right[k]
            if abs(pref) < POL_EPS:
                continue
            if i[j] is None or i[k] is None:
                raise ValueError("polarization has a component along a spectator axis")
            others = [a for a in axes if a not in (j, k)]
            if any(f[a] != i[a] for a in others):
                continue
            if j == k:
                b = spec.bases[j]
                n = len(b) if count is None else min(count, len(b))
                denom = b.energies[:n] - b.energies[i[j]] - E
                num = spec.p_row(j, f[j])[:n] * spec.p_column(j, i[j])[:n]
                _guard(denom, num, guard, j)
                terms = num / denom
                total += pref * terms.sum()
                tail += pref * terms[n - max(n // 10, 1):].sum()
            else:
                # the only intermediate state is f along k and i along j
                bk = spec.bases[k]
                if count is not None and f[k] >= count:
                    continue
                d = bk.energies[f[k]] - bk.energies[i[k]] - E
                num = spec.p_element(j, f[j], i[j]) * spec.p_element(k, f[k], i[k])
                if num != 0:
                    _check_denominator(d, guard, (k, f[k]))
                    total += pref * num / d
    return total, tail


def sum_over_states_A12(
    f: State,
    i: State,
    spec: SeparableSpectrum,
    geometry: ScatteringGeometry,
    E1: float,
    c: float = 1.0,
    count: Optional[int] = None,
    guard: float = GUARD_BAND,
) -> complex:
    """A12 as an explicit sum over the (optionally truncated) grid basis."""
    e1, e2 = polarization_vectors(geometry)
    # the 1/c of the amplitude cancels the c of the dipole seed
    return _weighted_sum(spec, f, i, E1, e2, e1, count, guard)[0]


def sum_over_states_A21(
    f: State,
    i: State,
    spec: SeparableSpectrum,
    geometry: ScatteringGeometry,
    E2: float,
    c: float = 1.0,
    count: Optional[int] = None,
    guard: float = GUARD_BAND,
) -> complex:
    e1, e2 = polarization_vectors(geometry)
    return _weighted_sum(spec, f, i, -E2, e1, e2, count, guard)[0]


def _full_band(lower: np.ndarray) -> np.ndarray:
    bw, n = lower.shape[0] - 1, lower.shape[1]
    ab = np.zeros((2 * bw + 1, n))
    for d in range(bw + 1):
        ab[bw + d, : n - d] = lower[d, : n - d]
        ab[bw - d, d:] = lower[d, : n - d]
    return ab


def resolvent_state(
    i: GridWavefunction,
    basis: AxisBasis,
    E1: float,
    E_i: float,
    c: float = 1.0,
    guard: float = GUARD_BAND,
) -> GridWavefunction:
    """Solve (H0 - E_i - E1)|s> = c p|i> on one axis with a banded solver."""
    shift = E_i + E1
    d1, _ = derivative_matrices(basis.grid)
    rhs = c * (-1j * basis.hbar) * (d1 @ i.values)
    near = np.abs(basis.energies - shift)
    for k in np.nonzero(near < guard)[0]:
        drive = abs(basis.grid.h * (basis.vectors[:, k] @ rhs))
        if drive > SELECTION_EPS * np.linalg.norm(rhs) * np.sqrt(basis.grid.h):
            raise ResonanceError(
                f"E_i + E1 = {shift:.6g} is within the guard band of grid level {k}", int(k), near[k]
            )
    lower = grid_hamiltonian_banded(basis.potential_values, basis.grid, basis.mass, basis.hbar)
    ab = _full_band(lower)
    bw = (ab.shape[0] - 1) // 2
    ab[bw] -= shift
    s = scipy.linalg.solve_banded((bw, bw), ab.astype(complex), rhs)
    return GridWavefunction(basis.grid, s)


def _resolvent_sum(spec, f, i, E, left, right, guard) -> complex:
    total = 0j
    axes = range(len(i))
    for k in axes:
        if abs(right[k]) < POL_EPS:
            continue
        b = spec.bases[k]
        e_i = b.energies[i[k]]
        s = resolvent_state(b.state(i[k]), b, E, e_i, 1.0, guard)
        for j in axes:
            if abs(left[j]) < POL_EPS:
                continue
            others = [a for a in axes if a not in (j, k)]
            if any(f[a] != i[a] for a in others):
                continue
            if j == k:
                d1, _ = derivative_matrices(b.grid)
                fp = -1j * b.hbar * b.grid.h * ((d1.T @ b.vectors[:, f[j]]) @ s.values)
                total += left[j] * right[k] * fp
            else:
                fk = b.grid.h * (b.vectors[:, f[k]] @ s.values)
                total += left[j] * right[k] * spec.p_element(j, f[j], i[j]) * fk
    return total


def resolvent_A12(f: State, i: State, spec: SeparableSpectrum, geometry, E1: float, guard: float = GUARD_BAND) -> complex:
    e1, e2 = polarization_vectors(geometry)
    return _resolvent_sum(spec, f, i, E1, e2, e1, guard)


def resolvent_A21(f: State, i: State, spec: SeparableSpectrum, geometry, E2: float, guard: float = GUARD_BAND) -> complex:
    e1, e2 = polarization_vectors(geometry)
    return _resolvent_sum(spec, f, i, -E2, e1, e2, guard)


def oracle_amplitude(
    f: State,
    i: State,
    spec: SeparableSpectrum,
    geometry: ScatteringGeometry,
    E1: float,
    mass: float = 1.0,
    N: int = 1,
    method: str = "sum",
    count: Optional[int] = None,
    guard: float = GUARD_BAND,
) -> tuple[complex, complex, complex]:
    """(A12, A21, M) from the chosen oracle."""
    E2 = E1 - (spec.energy(f) - spec.energy(i))
    if method == "sum":
        a12 = sum_over_states_A12(f, i, spec, geometry, E1, count=count, guard=guard)
        a21 = sum_over_states_A21(f, i, spec, geometry, E2, count=count, guard=guard)
    else:
        a12 = resolvent_A12(f, i, spec, geometry, E1, guard)
        a21 = resolvent_A21(f, i, spec, geometry, E2, guard)
    e1, e2 = polarization_vectors(geometry)
    thomson = N * float(e1 @ e2) * (1 if tuple(f) == tuple(i) else 0)
    return a12, a21, thomson - (a12 + a21) / mass


@dataclass
class OracleReport:
    oracle_A12: complex
    oracle_A21: complex
    oracle_M: complex
    series: list[complex]
    abs_dev: list[float]
    rel_dev: list[float]
    saturation: Optional[float] = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["order", "abs_deviation", "rel_deviation"])
        for n, (a, r) in enumerate(zip(self.abs_dev, self.rel_dev)):
            w.writerow([n, repr(a), repr(r)])
        return buf.getvalue()


def compare_series(
    series: SeriesAmplitude,
    spec: SeparableSpectrum,
    f: State,
    i: State,
    E1: float,
    count: Optional[int] = None,
    guard: float = GUARD_BAND,
) -> OracleReport:
    """Per-order deviation of the series partial sums M^(n) from the oracle amplitude."""
    a12, a21, M = oracle_amplitude(
        f, i, spec, series.geometry, E1, series.mass, series.N, "sum", count, guard
    )
    saturation = None
    if count is not None:
        e1, e2 = polarization_vectors(series.geometry)
        E2 = E1 - (spec.energy(f) - spec.energy(i))
        _, t12 = _weighted_sum(spec, f, i, E1, e2, e1, count, guard)
        _, t21 = _weighted_sum(spec, f, i, -E2, e1, e2, count, guard)
        saturation = abs(t12 + t21) / max(abs(a12 + a21), 1e-300)
    partials = list(series.breakdown(E1).partials)
    abs_dev = [abs(p - M) for p in partials]
    rel_dev = [d / abs(M) if M != 0 else float("inf") for d in abs_dev]
    return OracleReport(a12, a21, M, partials, abs_dev, rel_dev, saturation)
