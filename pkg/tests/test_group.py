import warnings

import numpy as np
import pytest

from charkern import (
    GroupSpec,
    ValidationError,
    character,
    coeffs_from_kernel,
    group_mercer_expansion,
    group_verdict,
    kernel_from_coeffs,
    mercer_decompose,
    product_group_kernel,
    real_onb,
    validate_z2_invariance,
)
from charkern.group import character_table, kappa_from_gram, z2_verdict_from_gram


def dft_table(moduli):
    """Characters from floating point exponentials, for comparison only."""
    g = GroupSpec(moduli)
    X = g.elements
    phase = sum(np.outer(X[:, j], X[:, j]) / m for j, m in enumerate(moduli))
    return np.exp(2j * np.pi * phase)


@pytest.mark.parametrize("moduli", [(2,), (5,), (2, 2), (3, 4), (2, 2, 6)])
def test_character_table_matches_exponentials(moduli):
    T = character_table(GroupSpec(moduli))
    np.testing.assert_allclose(T, dft_table(moduli), atol=1e-13)


def test_quarter_phases_exact():
    T = character_table(GroupSpec((4,)))
    assert T[1, 1] == 1j and T[2, 1] == -1 and T[1, 2] == -1


def test_character_homomorphism():
    g = GroupSpec((3, 4))
    i, x, y = (1, 3), (2, 1), (1, 2)
    lhs = character(g, i, tuple(np.add(x, y)))
    assert lhs == pytest.approx(character(g, i, x) * character(g, i, y), abs=1e-14)


def test_classes_z4_and_klein():
    z4 = GroupSpec((4,))
    # 0 and 2 are self-inverse; 1 < 3 so 1 goes to I+
    np.testing.assert_array_equal(z4.classes, [0, 1, 0, -1])
    klein = GroupSpec((2, 2))
    np.testing.assert_array_equal(klein.classes, [0, 0, 0, 0])


def test_real_onb_z4_values():
    E = real_onb(GroupSpec((4,)))
    r2 = np.sqrt(2.0)
    np.testing.assert_allclose(E[1], [r2, 0, -r2, 0], atol=1e-15)
    # Im e_3(x) = sin(3 pi x / 2)
    np.testing.assert_allclose(E[3], [0, -r2, 0, r2], atol=1e-15)
    np.testing.assert_allclose(E[2], [1, -1, 1, -1])


def test_z2_closed_form():
    g = GroupSpec((2,))
    gk = kernel_from_coeffs(g, [0.75, 0.25])
    np.testing.assert_array_equal(gk.spec.gram, [[1.0, 0.5], [0.5, 1.0]])
    assert validate_z2_invariance(gk.spec.gram)
    assert z2_verdict_from_gram(gk.spec.gram).characteristic == "yes"
    assert z2_verdict_from_gram([[1.0, 1.0], [1.0, 1.0]]).characteristic == "no"
    assert not validate_z2_invariance([[1.0, 0.5], [0.5, 2.0]])


def test_coeffs_dict_and_roundtrip():
    g = GroupSpec((2, 3))
    gk = kernel_from_coeffs(g, {"0,0": 1.0, "1,0": 0.5, "0,1": 0.25, "0,2": 0.25})
    np.testing.assert_allclose(coeffs_from_kernel(g, gk.kappa), gk.coeffs, atol=1e-14)
    np.testing.assert_allclose(kappa_from_gram(g, gk.spec.gram), gk.kappa)


def test_series_forms_agree(rng):
    g = GroupSpec((3, 5))
    lam = rng.uniform(0, 1, g.order)
    gk = kernel_from_coeffs(g, np.maximum(lam, lam[g.negation]))
    np.testing.assert_allclose(gk.gram_series(), gk.gram_cosine(), atol=1e-13)
    np.testing.assert_allclose(gk.spec.gram, gk.gram_series(), atol=1e-13)


def test_asymmetric_coeffs_warn_or_keep():
    g = GroupSpec((4,))
    with pytest.warns(UserWarning, match="symmetrized"):
        gk = kernel_from_coeffs(g, [1.0, 0.5, 0.2, 0.1])
    np.testing.assert_allclose(gk.coeffs, [1.0, 0.3, 0.2, 0.3])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        raw = kernel_from_coeffs(g, [1.0, 0.5, 0.2, 0.1], symmetrize=False)
    assert not raw.translation_invariant
    # still a Mercer kernel with eigenfunctions e_i*
    m = mercer_decompose(raw.spec)
    np.testing.assert_allclose(np.sort(m.lambdas), np.sort(raw.coeffs) / 1.0, atol=1e-14)


def test_coeffs_from_kernel_validation():
    g = GroupSpec((4,))
    with pytest.raises(ValidationError):
        coeffs_from_kernel(g, [1.0, 0.5, 0.0, 0.2])
    with pytest.warns(UserWarning, match="negative"):
        lam = coeffs_from_kernel(g, [0.0, 1.0, 0.0, 1.0])
    assert lam.min() < 0
    with pytest.raises(ValidationError):
        kernel_from_coeffs(g, [1.0, -0.1, 0.0, -0.1])


def test_group_verdict_witness():
    g = GroupSpec((6,))
    gk = kernel_from_coeffs(g, [1.0, 0.5, 0.0, 0.3, 0.0, 0.5])
    v = group_verdict(gk)
    assert v.characteristic == "no" and len(v.witnesses) == 2
    for w in v.witnesses:
        assert abs(w.sum()) < 1e-14
        assert w @ gk.spec.gram @ w < 1e-14
    assert group_verdict(kernel_from_coeffs(g, [0, 1, 1, 1, 1, 1])).universal == "no"
    assert group_verdict(kernel_from_coeffs(g, [0, 1, 1, 1, 1, 1])).characteristic == "yes"


def test_product_group_kernel():
    kC = kernel_from_coeffs(GroupSpec((2,)), [1.0, 0.5])
    kD = kernel_from_coeffs(GroupSpec((3,)), [1.0, 0.25, 0.25])
    kp = product_group_kernel(kC, kD)
    np.testing.assert_allclose(kp.spec.gram, np.kron(kC.spec.gram, kD.spec.gram), atol=1e-15)
    np.testing.assert_allclose(kp.coeffs, np.outer(kC.coeffs, kD.coeffs).ravel())


def test_group_mercer_expansion():
    gk = kernel_from_coeffs(GroupSpec((5,)), [0.2, 1.0, 0.5, 0.5, 1.0])
    m = group_mercer_expansion(gk)
    np.testing.assert_allclose(m.lambdas, [1.0, 1.0, 0.5, 0.5, 0.2])
    assert m.source_index[m.index_of_one] == 0
    np.testing.assert_allclose(m.reconstruct(), gk.spec.gram, atol=1e-14)
