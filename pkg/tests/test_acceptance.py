"""Acceptance criteria 1-12.

Each test records one PASS/FAIL line (printed in the terminal summary) before
asserting, so a red criterion still reports its measured numbers.
"""

import math
import time
from fractions import Fraction

import numpy as np

from twophoton import opalg, series
from twophoton.cli import run_golden
from twophoton.errors import ResonanceError
from twophoton.models import (
    AbstractTwoBody,
    ConstantBox,
    CoupledHarmonicPair,
    Coulomb,
    Hamiltonian,
    Harmonic,
    HarmonicCoupling,
    InteractingPair,
    Morse,
    Separable,
    SeparableAbstract,
    SymmetricLinear,
)
from twophoton.numerics import HarmonicBasisState, LadderState, ProductState
from twophoton.opalg import commutator, parse_expr
from twophoton.oracle import compare_series, oracle_amplitude
from twophoton.scattering import (
    EnergyLawRegressor,
    ScatteringGeometry,
    SeriesAmplitude,
    differential_cross_section,
    harmonic_rayleigh_closed,
)
from twophoton.series import (
    center_of_mass_content,
    coupling_contribution,
    detect_double_commutator_closure,
    reciprocal_cancellation_check,
    scattering_operator,
    transition_operator,
)

from conftest import ACCEPTANCE, UNITS, box_state, grid_spectrum

XI = math.pi**2 / 2


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[n])


def ho(n, omega=1.0, mass=1.0):
    return ProductState.harmonic(HarmonicBasisState(tuple(n), omega, mass, 1.0))


def test_criterion_01_morse_golden():
    series._sequence.cache_clear()
    opalg._d_pos.cache_clear()
    t0 = time.perf_counter()
    results = run_golden("morse_reference")
    dt = time.perf_counter() - t0
    ok = len(results) == 6 and all(r for _, r in results) and dt < 10
    record(1, ok, f"{sum(r for _, r in results)}/6 orders identical, {dt:.1f} s")
    assert ok


def test_criterion_02_harmonic_closure():
    h = Hamiltonian(Harmonic("omega"))
    h0 = h.to_operator_expr()
    lam = opalg.Coeff.param("hbar", 2) * opalg.Coeff.param("omega", 2)
    closure = True
    for axis in range(3):
        o1 = scattering_operator(h, axis, 1)
        closure &= commutator(h0, commutator(h0, o1)) == o1 * lam
        closure &= detect_double_commutator_closure(h, axis) == lam

    # (1 - lam/E^2) T = O1/E + O2/E^2, term by term, at rational E and omega
    matches = True
    for omega, E in [(Fraction(1), Fraction(3, 7)), (Fraction(2, 3), Fraction(5, 2)), (Fraction(5), Fraction(11, 3))]:
        b = dict(UNITS, omega=omega)
        t = transition_operator(Hamiltonian(Harmonic("omega")), E, exact=True)
        lam_v = omega**2
        w = t.exact_weights(E, b)
        matches &= w[0] * (1 - lam_v / E**2) == opalg.as_coeff(1 / E)
        matches &= w[1] * (1 - lam_v / E**2) == opalg.as_coeff(1 / E**2)
        o1, o2 = (op.subs(b) for op in t.operators)
        matches &= o1 == parse_expr("-1 | p_x")
        matches &= o2 == parse_expr(f"-{omega**2}*i | x")
        # resummed: T = -(E p + i m omega^2 x) / (E^2 - omega^2)
        d = E**2 - lam_v
        expected = parse_expr(f"{-E / d} | p_x\n{-omega**2 / d}*i | x")
        matches &= t.as_expr(E, b) == expected
    ok = bool(closure and matches)
    record(2, ok, f"closure {'exact' if closure else 'broken'}, closed-form T {'matches' if matches else 'differs'} term by term")
    assert ok


def test_criterion_03_terminal_series():
    box = Hamiltonian(ConstantBox(1))
    box_zero = all(scattering_operator(box, a, k).is_zero() for a in range(3) for k in range(2, 8))
    lin = Hamiltonian(SymmetricLinear("bx", "by", "bz"))
    eps = (Fraction(3, 5), Fraction(4, 5), Fraction(0))

    def combined(k):
        out = opalg.OperatorExpr()
        for a, e in enumerate(eps):
            if e:
                out = out + scattering_operator(lin, a, k) * e
        return out

    o2_ok = combined(2) == parse_expr("-3/5*i*bx*c*hbar | sign(x)\n-4/5*i*by*c*hbar | sign(y)")
    o2_axes = all(
        scattering_operator(lin, a, 2) == parse_expr(f"-i*b{n}*c*hbar | sign({n})") for a, n in enumerate("xyz")
    )
    lin_zero = all(combined(k).is_zero() for k in range(3, 8))
    ok = box_zero and o2_ok and o2_axes and lin_zero
    record(3, ok, f"box O2..O7 zero={box_zero}, linear O2 = -i hbar c eps.B={o2_ok and o2_axes}, O3..O7 zero={lin_zero}")
    assert ok


def test_criterion_04_identical_particle_cancellation():
    free = Hamiltonian(InteractingPair())
    free_ok = reciprocal_cancellation_check(free) and coupling_contribution(free, "x", 2).is_zero()
    bound = Hamiltonian(InteractingPair(SeparableAbstract()))
    vanish = {k: coupling_contribution(bound, "x", k).is_zero() for k in (2, 3, 4)}
    o5 = not coupling_contribution(bound, "x", 5).is_zero()
    ok = free_ok and all(vanish.values()) and o5
    detail = f"free O2 zero={free_ok}, bound zero at O2..O4={[vanish[k] for k in (2, 3, 4)]}, O5 nonzero={o5}"
    record(4, ok, detail)
    assert ok, detail


def test_criterion_05_center_of_mass_factorization():
    rng = np.random.default_rng(5)
    omega = Fraction(13, 10)
    bind = dict(UNITS, omega=omega, kappa=Fraction(7, 10), alpha=1)
    worst, content = 0.0, True
    for coupling in (AbstractTwoBody(), HarmonicCoupling("kappa"), Coulomb("alpha")):
        h = Hamiltonian(CoupledHarmonicPair("omega", coupling), (1, 1))
        for a in range(3):
            content &= center_of_mass_content(transition_operator(h, "E", axis=a, exact=True))
        for _ in range(10):
            E = float(rng.uniform(0.1, 6.0))
            g = ScatteringGeometry(*rng.uniform(0, math.pi, 3))
            s = ho((0, 0, 0), float(omega), 2.0)
            amp = SeriesAmplitude(h, s, s, g, exact=True, bindings=bind)
            ref = harmonic_rayleigh_closed(E, float(omega), g)
            worst = max(worst, abs(amp.breakdown(E).total / 2 - ref) / abs(ref))
    ok = content and worst < 1e-12
    record(5, ok, f"centre-of-mass content only={content}, max rel dev of M/N from the single-particle closed form {worst:.1e}")
    assert ok


def test_criterion_06_rayleigh_vs_oracle():
    t0 = time.perf_counter()
    spec = grid_spectrum(Harmonic(1), n=2048, axes=(0, 2))
    g = ScatteringGeometry(math.pi / 3, 0, 0)
    s = ho((0, 0, 0))
    amp = SeriesAmplitude(Hamiltonian(Harmonic(1)), s, s, g, exact=True, bindings=UNITS)
    devs = []
    for E in (0.3, 0.5, 2.0, 3.0, 5.0):
        _, _, M = oracle_amplitude((0, None, 0), (0, None, 0), spec, g, E)
        devs.append(abs(amp.breakdown(E).total - M) / abs(M))
    low = abs(amp.breakdown(0.01).total)
    high = abs(amp.breakdown(100.0).total - 0.5)
    dt = time.perf_counter() - t0
    ok = max(devs) < 1e-6 and low < 1e-3 and high < 1e-4 and dt < 60
    record(6, ok, f"max rel dev {max(devs):.1e}, |M(0.01)|={low:.1e}, |M(100)-e1.e2|={high:.1e}, {dt:.1f} s")
    assert ok


def test_criterion_07_box_raman():
    spec = grid_spectrum(ConstantBox(1), n=2048)
    h = Hamiltonian(ConstantBox(1))
    i = (1, 1, 1)
    cases = [
        ((2, 1, 2), ScatteringGeometry(math.pi / 2, 0, 0)),
        ((2, 1, 2), ScatteringGeometry(1.1, 0, 0.4)),
        ((2, 2, 1), ScatteringGeometry(0.8, 0, 0.9)),
        ((3, 1, 1), ScatteringGeometry(0.8, 0, 0.9)),
    ]
    worst = 0.0
    for f, g in cases:
        amp = SeriesAmplitude(h, box_state(spec, i), box_state(spec, f), g, order=1, bindings=UNITS)
        for E in (40.0, 95.0, 230.0):
            _, _, M = oracle_amplitude(tuple(k - 1 for k in f), tuple(k - 1 for k in i), spec, g, E)
            S = amp.breakdown(E).total
            worst = max(worst, abs(S - M) / max(abs(M), abs(S)))

    from twophoton.cli import load_config, run_scan

    cfg = load_config(
        "[potential]\nvariant = box\na = 1\n[geometry]\ntheta = 1.5707963267948966\n"
        "[states]\ninitial = 1,1,1\nfinal = 2,1,1; 2,1,2\n"
        "[energies]\ne_min = 1\ne_max = 120\npoints = 120\n[method]\nmethod = series\norder = 1\n"
        "[numerics]\npoints = 1024\n"
    )
    flagged = [float(l.split(",")[0]) for l in run_scan(cfg).splitlines() if "pole:E2=0" in l]
    step = (120 - 1) / 119
    peak_ok = bool(flagged) and abs(flagged[0] - 3 * XI) <= step
    ok = worst < 1e-6 and peak_ok
    first = f"{flagged[0]:.2f}" if flagged else "none"
    record(7, ok, f"order-1 vs oracle max rel dev {worst:.2e}; first flag at E1={first} vs 3 xi={3 * XI:.2f}")
    assert ok


def test_criterion_08_morse_convergence():
    t0 = time.perf_counter()
    pot = Morse(1, Fraction(1, 3))
    spec = grid_spectrum(pot, n=4096, axes=(0,))
    s = spec.product_state((0, None, None))
    amp = SeriesAmplitude(Hamiltonian(pot), s, s, ScatteringGeometry(), order=6, bindings=UNITS)
    strict, final, rows = True, 0.0, []
    for E in (4.0, 5.0, 8.0, 20.0):
        rep = compare_series(amp, spec, (0, None, None), (0, None, None), E)
        d = rep.abs_dev[2:7]
        strict &= all(b < a * (1 - 1e-9) for a, b in zip(d, d[1:]))
        final = max(final, rep.rel_dev[6])
        rows.append(f"E={E:g}: " + " ".join(f"{x:.2e}" for x in rep.rel_dev[2:7]))
    dt = time.perf_counter() - t0
    ok = strict and final < 1e-2 and dt < 300
    record(8, ok, f"strictly decreasing={strict}, max |M6-Mo|/|Mo|={final:.1e}, {dt:.0f} s; " + "; ".join(rows[:1]))
    assert ok


def test_criterion_09_energy_law():
    spec = grid_spectrum(ConstantBox(1), full=False, count=3)
    g = ScatteringGeometry(math.pi / 2, 0, 0)
    i, f = box_state(spec, (1, 1, 1)), box_state(spec, (2, 1, 2))
    amp = SeriesAmplitude(Hamiltonian(ConstantBox(1)), i, f, g, order=1, bindings=UNITS)
    E_res = amp.E_res
    E = np.linspace(5 * E_res, 50 * E_res, 80)
    sigma = np.array([differential_cross_section(amp.breakdown(e), e) for e in E])
    X = E.reshape(-1, 1)
    full = EnergyLawRegressor(order=1, e_res=E_res).fit(X, sigma).result()
    lo = EnergyLawRegressor(order=1, e_res=E_res).fit(X[:40], sigma[:40]).result()
    hi = EnergyLawRegressor(order=1, e_res=E_res).fit(X[40:], sigma[40:]).result()
    drift = abs(lo.c1 - hi.c1) / abs(full.c1)
    ok = full.residual < 1e-3 and drift < 1e-2
    record(9, ok, f"residual {full.residual:.1e}, c1={full.c1:.6g}, half-window drift {drift:.1e}")
    assert ok


def test_criterion_10_rayleigh_first_order_nullity():
    rng = np.random.default_rng(10)
    h_ho = Hamiltonian(Harmonic(1))
    ho_pairs = [((0, 1, 0), (1, 0, 0)), ((1, 2, 0), (2, 0, 1)), ((0, 0, 3), (3, 0, 0)), ((1, 1, 2), (2, 1, 1)), ((0, 2, 1), (1, 0, 2))]
    box_spec = grid_spectrum(ConstantBox(1), full=False, count=3)
    h_box = Hamiltonian(ConstantBox(1))
    box_pairs = [((1, 2, 1), (2, 1, 1)), ((1, 1, 3), (3, 1, 1)), ((1, 2, 3), (3, 2, 1)), ((2, 2, 1), (1, 2, 2)), ((1, 3, 2), (2, 1, 3))]
    worst = 0.0
    for (i, f), h, make in [(p, h_ho, ho) for p in ho_pairs] + [(p, h_box, lambda n: box_state(box_spec, n)) for p in box_pairs]:
        g = ScatteringGeometry(*rng.uniform(0, math.pi, 3))
        E = float(rng.uniform(2, 50))
        amp = SeriesAmplitude(h, make(i), make(f), g, order=1, bindings=UNITS)
        worst = max(worst, abs(amp.A12_orders(E)[0] + amp.A21_orders(E)[0]))
    ok = worst < 1e-12
    record(10, ok, f"max |A12 + A21| at first order {worst:.1e} over 10 pairs")
    assert ok


def _ladder_product(n, omegas):
    axes = tuple(LadderState(k, w) for k, w in zip(n, omegas))
    return ProductState(axes, sum(w * (k + 0.5) for k, w in zip(n, omegas)), tuple(n))


def test_criterion_11_polarization_decoupling():
    rng = np.random.default_rng(11)
    # symbolic: the x-seeded operators never see V(y) or V(z)
    variants = [
        Separable(SymmetricLinear(1), Harmonic(3), ConstantBox(1)),
        Separable(SymmetricLinear(1), ConstantBox(2), SymmetricLinear(5)),
        Separable(SymmetricLinear(1), None, Harmonic(2)),
    ]
    ops_same = all(
        scattering_operator(Hamiltonian(v), 0, k) == scattering_operator(Hamiltonian(variants[0]), 0, k)
        for v in variants[1:]
        for k in range(1, 7)
    )
    # symbolic path amplitudes: exact ladder states, unrelated y/z frequencies
    bit_same = True
    geoms = [ScatteringGeometry(float(rng.uniform(0, math.pi)), 0, float(rng.uniform(0, math.pi))) for _ in range(3)]
    for g in geoms:
        for i, f in [((0, 1, 2), (0, 1, 2)), ((2, 0, 1), (2, 0, 1)), ((0, 0, 0), (1, 0, 0))]:
            totals = set()
            for oy, oz in [(2, 3), (5, 7 / 3), (0.4, 11)]:
                om = (1, oy, oz)
                h = Hamiltonian(Separable(Harmonic(1), Harmonic(oy), Harmonic(oz)))
                amp = SeriesAmplitude(h, _ladder_product(i, om), _ladder_product(f, om), g, order=6, bindings=UNITS)
                E = 3.7 + amp.E_res
                totals.add(amp.breakdown(E).total)
            bit_same &= len(totals) == 1
    # numeric path: grid oracle with different transverse potentials
    worst = 0.0
    specs = [grid_spectrum(v, n=1024, axes=(0, 1, 2)) for v in (variants[0], variants[1])]
    for g in geoms:
        for i, f in [((0, 0, 0), (0, 0, 0)), ((0, 1, 0), (2, 1, 0))]:
            E = 4.3
            Ms = [oracle_amplitude(f, i, s, g, E + s.energy(f) - s.energy(i))[2] for s in specs]
            worst = max(worst, abs(Ms[0] - Ms[1]) / abs(Ms[0]))
    ok = ops_same and bit_same and worst < 1e-10
    record(11, ok, f"O_k^(x) identical={ops_same}, symbolic totals bit-identical={bit_same}, numeric max rel dev {worst:.1e}")
    assert ok


def test_criterion_12_oracle_cross_validation():
    rng = np.random.default_rng(12)
    families = [
        lambda: Harmonic(float(rng.choice([1.0, 1.5]))),
        lambda: SymmetricLinear(*[float(rng.choice([1.0, 2.0]))] * 3),
        lambda: ConstantBox(float(rng.choice([1.0, 2.0]))),
        lambda: Morse(1, Fraction(1, 3)),
    ]
    cache = {}
    worst, done, tries = 0.0, 0, 0
    while done < 20:
        tries += 1
        k = done % 4
        pot = families[k]()
        morse = isinstance(pot, Morse)
        if pot not in cache:
            cache[pot] = grid_spectrum(pot, n=1024, axes=(0,) if morse else (0, 1, 2))
        spec = cache[pot]
        if morse:
            g = ScatteringGeometry()
            i = (int(rng.integers(0, 3)), None, None)
            f = (int(rng.integers(0, 3)), None, None)
        else:
            g = ScatteringGeometry(*rng.uniform(0, math.pi, 3))
            i = tuple(int(v) for v in rng.integers(0, 3, 3))
            f = tuple(int(v) for v in rng.integers(0, 3, 3))
        E_res = spec.energy(f) - spec.energy(i)
        E = max(E_res, 0) + float(rng.uniform(0.2, 12))
        try:
            a = oracle_amplitude(f, i, spec, g, E, method="sum")
            b = oracle_amplitude(f, i, spec, g, E, method="res")
        except ResonanceError:
            continue  # too close to a pole; draw again
        scale = max(abs(a[0]), abs(a[1]), abs(a[2]))
        if scale < 1e-9:
            continue  # selection-forbidden: both oracles sit at round-off, nothing to compare
        dev = max(abs(u - v) for u, v in zip(a, b)) / scale
        worst = max(worst, dev)
        done += 1
    ok = worst < 1e-8
    record(12, ok, f"max rel dev sum vs resolvent {worst:.1e} over 20 configurations ({tries} draws)")
    assert ok
