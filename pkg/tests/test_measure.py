import numpy as np
import pytest

from charkern import (
    Density,
    DiscreteSpace,
    DomainError,
    SignedMeasure,
    SpaceMismatchError,
    ValidationError,
    density_to_measure,
    hahn_jordan,
    measure_to_density,
    mix,
    product_measure,
    tv_norm,
)
from charkern.measure import product_space, zero_mass_part


def test_space_basics():
    s = DiscreteSpace(["a", "b", "c"], [1.0, 2.0, 1.0])
    assert len(s) == 3
    assert s.index("b") == 1
    assert not s.is_probability
    assert DiscreteSpace.uniform(4).is_probability
    with pytest.raises(DomainError):
        s.index("z")
    with pytest.raises(KeyError):  # DomainError is also a KeyError
        s.index("z")


@pytest.mark.parametrize("points,nu", [([], None), (["a", "a"], None), (["a", "b"], [1.0, 0.0]),
                                       (["a"], [np.nan]), (["a", "b"], [1.0])])
def test_space_rejects(points, nu):
    with pytest.raises(ValidationError):
        DiscreteSpace(points, nu)


def test_space_is_immutable_and_roundtrips():
    s = DiscreteSpace(["x", "y"], [0.25, 0.75])
    with pytest.raises(ValueError):
        s.nu[0] = 1.0
    t = DiscreteSpace.from_dict(s.to_dict())
    assert t.same_as(s) and t == s


def test_measure_arithmetic():
    s = DiscreteSpace.uniform(3)
    d0, d1 = SignedMeasure.dirac(s, s.points[0]), SignedMeasure.dirac(s, s.points[1])
    mu = d0 - d1
    assert mu.total_mass == 0.0 and mu.is_zero_mass
    assert tv_norm(mu) == 2.0
    assert tv_norm(-mu * 3.0) == 6.0
    assert (d0 + d1).total_mass == 2.0
    assert SignedMeasure.zero(s).total_mass == 0.0
    with pytest.raises(SpaceMismatchError):
        d0 + SignedMeasure.dirac(DiscreteSpace.uniform(3, prefix="q"), "q0")


def test_hahn_jordan(rng):
    s = DiscreteSpace.uniform(6)
    mu = SignedMeasure(s, rng.standard_normal(6))
    pos, neg = hahn_jordan(mu)
    assert np.all(pos.mass >= 0) and np.all(neg.mass >= 0)
    assert np.all(pos.mass * neg.mass == 0)
    np.testing.assert_allclose((pos - neg).mass, mu.mass)
    assert tv_norm(mu) == pytest.approx(pos.total_mass + neg.total_mass)


def test_mix_and_validation():
    s = DiscreteSpace.uniform(2)
    P, Q = SignedMeasure(s, [1.0, 0.0]), SignedMeasure(s, [0.0, 1.0])
    np.testing.assert_allclose(mix(0.25, P, Q).mass, [0.75, 0.25])
    with pytest.raises(ValidationError):
        mix(1.5, P, Q)


def test_density_conversion():
    s = DiscreteSpace(["a", "b"], [0.5, 1.5])
    h = Density(s, [0.5, 0.5])
    mu = density_to_measure(h)
    np.testing.assert_allclose(mu.mass, [0.25, 0.75])
    np.testing.assert_allclose(measure_to_density(mu).h, h.h)
    with pytest.raises(ValidationError):
        Density(s, [1.0, 1.0])
    with pytest.raises(ValidationError):
        Density(s, [-0.5, 0.833333333333])
    np.testing.assert_allclose(Density.uniform(s).h, [0.5, 0.5])


def test_product_measure():
    s1, s2 = DiscreteSpace.uniform(2, "a"), DiscreteSpace.uniform(3, "b")
    m = product_measure(SignedMeasure(s1, [1.0, 2.0]), SignedMeasure(s2, [1.0, 0.0, -1.0]))
    assert m.space.same_as(product_space(s1, s2))
    np.testing.assert_allclose(m.mass, [1, 0, -1, 2, 0, -2])


def test_zero_mass_part():
    s = DiscreteSpace.uniform(3)
    P = SignedMeasure(s, [0.2, 0.3, 0.5])
    mu = SignedMeasure(s, [1.0, 1.0, 0.0])
    z = zero_mass_part(mu, P)
    assert abs(z.total_mass) < 1e-15
