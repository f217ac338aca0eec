from fractions import Fraction

import pytest

from twophoton.errors import DomainError, ModelError, NotRepresentableError, PoleError
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
    SeparableAbstract,
    SymmetricLinear,
)
from twophoton.opalg import Coeff, commutator, momentum, parse_expr, position
from twophoton.series import (
    ScatteringOperatorSequence,
    center_of_mass_content,
    center_of_mass_hamiltonian,
    coupling_contribution,
    detect_double_commutator_closure,
    geometric_expansion,
    reciprocal_cancellation_check,
    scattering_operator,
    to_center_of_mass,
    transition_operator,
)


def test_sequence_is_nested_commutator():
    h = Hamiltonian(Harmonic("omega"))
    h0 = h.to_operator_expr()
    o1 = scattering_operator(h, "x", 1)
    assert scattering_operator(h, "x", 2) == commutator(h0, o1)
    assert scattering_operator(h, "x", 3) == commutator(h0, commutator(h0, o1))


def test_sequence_terminates():
    seq = ScatteringOperatorSequence(Hamiltonian(ConstantBox(1)).to_operator_expr(), momentum(0) * -1)
    assert seq.order(5).is_zero()
    assert seq.terminal
    with pytest.raises(DomainError):
        seq.order(0)


def test_linear_potential_series():
    h = Hamiltonian(SymmetricLinear("bx", "by", "bz"))
    assert scattering_operator(h, "y", 2) == parse_expr("-i*by*c*hbar | sign(y)")
    assert scattering_operator(h, "y", 3).is_zero()


def test_morse_sequence_uses_x_only():
    with pytest.raises(NotRepresentableError):
        scattering_operator(Hamiltonian(Morse()), "y", 1)
    o4 = scattering_operator(Hamiltonian(Morse()), "x", 4)
    assert o4.coordinates() == {(0, 0)}


def test_harmonic_closure():
    h = Hamiltonian(Harmonic("omega"))
    lam = detect_double_commutator_closure(h, "x")
    assert lam == Coeff.param("hbar", 2) * Coeff.param("omega", 2)
    assert detect_double_commutator_closure(Hamiltonian(Morse()), "x") is None


def test_transition_operator_weights():
    h = Hamiltonian(Harmonic(1))
    t = transition_operator(h, 2, n=3)
    assert t.weights(2) == [0.5, 0.25, 0.125]
    assert t.weights(-2) == [-0.5, 0.25, -0.125]
    closed = transition_operator(h, 2, exact=True)
    assert closed.weights(2, {"hbar": 1}) == pytest.approx([2 / 3, 1 / 3])
    with pytest.raises(PoleError):
        closed.weights(1, {"hbar": 1})
    with pytest.raises(DomainError):
        transition_operator(h, 0)
    with pytest.raises(ModelError):
        transition_operator(Hamiltonian(Morse()), 1, exact=True)


def test_closed_form_equals_resummed_series():
    # (1 - lam/E^2) T = O1/E + O2/E^2 expanded in lam/E^2 gives T_n
    h = Hamiltonian(Harmonic("omega"))
    closed = transition_operator(h, "E", exact=True)
    expanded = geometric_expansion(closed, 6)
    truncated = transition_operator(h, "E", n=6)
    for a, b in zip(expanded.operators, truncated.operators):
        assert a == b


def test_transition_operator_as_expr():
    h = Hamiltonian(Harmonic(1))
    t = transition_operator(h, 1, n=2)
    e = t.as_expr(Fraction(1, 2), {"c": 1, "hbar": 1, "m": 1})
    assert e == parse_expr("-2 | p_x\n-4*i | x")


def test_coupling_cancels_in_second_order():
    h = Hamiltonian(InteractingPair())
    assert reciprocal_cancellation_check(h)
    assert coupling_contribution(h, "x", 2).is_zero()
    assert coupling_contribution(h, "x", 3).is_zero()


def test_coupling_with_abstract_binding_reappears():
    h = Hamiltonian(InteractingPair(SeparableAbstract()))
    assert coupling_contribution(h, "x", 3).is_zero()
    assert not coupling_contribution(h, "x", 5).is_zero()


def test_coupling_never_enters_harmonic_pair():
    for coupling in (AbstractTwoBody(), HarmonicCoupling("kappa"), Coulomb("alpha")):
        h = Hamiltonian(CoupledHarmonicPair("omega", coupling))
        for k in range(1, 6):
            assert coupling_contribution(h, "x", k).is_zero()


def test_center_of_mass_content():
    h = Hamiltonian(CoupledHarmonicPair("omega", HarmonicCoupling("kappa")))
    assert center_of_mass_content(transition_operator(h, "E", n=4))
    assert center_of_mass_content(transition_operator(h, "E", exact=True))
    assert not center_of_mass_content(position(0, 0) * momentum(0, 1))
    # one-particle operators pass vacuously
    assert center_of_mass_content(position(0, 0) * momentum(0, 0))


def test_to_center_of_mass():
    xa, xb = position(0, 0), position(0, 1)
    pa, pb = momentum(0, 0), momentum(0, 1)
    R, P = position(0), momentum(0)
    assert to_center_of_mass((xa + xb) * Fraction(1, 2)) == R
    assert to_center_of_mass(pa + pb) == P
    with pytest.raises(ValueError):
        to_center_of_mass(xa - xb)


def test_center_of_mass_hamiltonian():
    h = Hamiltonian(CoupledHarmonicPair(2, AbstractTwoBody()), (1, 1))
    com = center_of_mass_hamiltonian(h)
    assert com.masses == (2,)
    assert com.potential == Harmonic(2)
    with pytest.raises(ModelError):
        center_of_mass_hamiltonian(Hamiltonian(CoupledHarmonicPair(2)))


def test_reference_units_first_orders():
    h = Hamiltonian(Morse())
    o2 = scattering_operator(h, "x", 2).subs(REFERENCE_UNITS)
    assert o2 == parse_expr("2/3*i | exp(-2*x/3)\n-2/3*i | exp(-x/3)")
