import math
from fractions import Fraction

import numpy as np
import pytest

from twophoton.errors import ModelError, NotRepresentableError
from twophoton.models import (
    REFERENCE_UNITS,
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
    axis_index,
    dipole_seed,
    param_value,
)
from twophoton.opalg import LinearForm, exp_of, func, momentum, parse_expr, position, sign_of


def test_axis_index():
    assert [axis_index(a) for a in ("x", "y", "z", 2)] == [0, 1, 2, 2]
    with pytest.raises(ValueError):
        axis_index("w")


def test_param_value():
    assert param_value(Fraction(1, 3)) == pytest.approx(1 / 3)
    assert param_value("m", {"m": 2}) == 2.0


def test_box_is_constant_inside():
    box = ConstantBox(1, V0=5)
    assert box.domain(1) == (Fraction(-1, 2), Fraction(1, 2))
    assert Hamiltonian(box).potential_expr() == parse_expr("5 | 1")
    assert box.xi() == pytest.approx(math.pi**2 / 2)
    with pytest.raises(ModelError):
        ConstantBox(0)


def test_box_sizes_per_axis():
    box = ConstantBox((1, 2, 3))
    assert box.domain(2) == (Fraction(-3, 2), Fraction(3, 2))


def test_linear_potential_expr():
    pot = Hamiltonian(SymmetricLinear(1, 2, 3)).potential_expr()
    expected = parse_expr("1 | x sign(x)\n2 | y sign(y)\n3 | z sign(z)")
    assert pot == expected
    xs = np.array([-2.0, 0.5])
    assert np.allclose(SymmetricLinear(1, 2, 3).axis_values(1, xs, 1, {}), [4.0, 1.0])


def test_harmonic_potential_expr():
    pot = Harmonic("omega").axis_expr(0, (0, 0), "m")
    assert pot == parse_expr("1/2*m*omega^2 | x^2")
    assert np.allclose(Harmonic(2, r0=(1, 0, 0)).axis_values(0, np.array([3.0]), 1, {}), [8.0])


def test_morse_spectrum_in_reference_units():
    m = Morse(1, Fraction(1, 3))
    lam = m.lam(1, 1)
    assert lam == pytest.approx(3 * math.sqrt(2))
    assert m.bound_state_count(1, 1) == 4
    for n in range(4):
        assert m.energy_level(n, 1, 1) == pytest.approx(-((1 - (n + 0.5) / lam) ** 2))


def test_morse_symbolic_form():
    pot = Hamiltonian(Morse()).potential_expr()
    X = LinearForm.coordinate(0)
    assert pot.subs(REFERENCE_UNITS) == exp_of(X, Fraction(-2, 3)) - exp_of(X, Fraction(-1, 3)) * 2


def test_morse_transverse_not_representable():
    with pytest.raises(NotRepresentableError):
        Morse().axis_expr(1, (0, 1), "m")
    with pytest.raises(ModelError):
        Morse(x0="x0")


def test_separable_abstract():
    pot = Hamiltonian(SeparableAbstract()).potential_expr()
    assert pot == func("Ux", LinearForm.coordinate(0)) + func("Uy", LinearForm.coordinate(1)) + func(
        "Uz", LinearForm.coordinate(2)
    )


def test_separable_composition_uses_x_profile_per_axis():
    sep = Separable(x=Harmonic(1), y=SymmetricLinear(2), z=None)
    e = sep.axis_expr(1, (0, 1), "m")
    assert e == position(1) * sign_of(LinearForm.coordinate(1)) * 2
    assert sep.axis_expr(2, (0, 2), "m").is_zero()


def test_two_body_couplings():
    r = LinearForm.coordinate(0, 0) - LinearForm.coordinate(0, 1)
    assert AbstractTwoBody(axes=(0,)).expr() == func("V", r)
    hc = HarmonicCoupling(2).expr()
    assert hc.coordinates() == {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)}
    with pytest.raises(NotRepresentableError):
        Coulomb(1).expr()
    assert np.allclose(Coulomb(2).values(np.array([0.5, -4.0])), [4.0, 0.5])


def test_pair_hamiltonian():
    h = Hamiltonian(CoupledHarmonicPair(1, HarmonicCoupling(1)))
    assert h.masses == ("m", "m")
    assert h.n_particles == 2
    assert {c[0] for c in h.to_operator_expr().coordinates()} == {0, 1}
    with pytest.raises(NotRepresentableError):
        Hamiltonian(CoupledHarmonicPair(1, Coulomb(1))).to_operator_expr()
    with pytest.raises(ModelError):
        Hamiltonian(InteractingPair(), ("m",))


def test_kinetic_energy():
    h = Hamiltonian(ConstantBox(1), (2,))
    p = momentum(0)
    assert h.kinetic() == (p * p + momentum(1) ** 2 + momentum(2) ** 2) * Fraction(1, 4)


def test_dipole_seed():
    assert dipole_seed("y") == momentum(1) * -1 * parse_expr("c | 1")
    assert dipole_seed(0, 2) == (momentum(0, 0) + momentum(0, 1)) * parse_expr("-c | 1")
