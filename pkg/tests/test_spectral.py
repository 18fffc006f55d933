import numpy as np
import pytest

from charkern import (
    Density,
    DiscreteSpace,
    GroupSpec,
    KernelSpec,
    PreconditionError,
    SignedMeasure,
    density_to_measure,
    kernel_from_coeffs,
    mercer_decompose,
    mmd_sq,
    mmd_sq_spectral,
    near_zero_mmd_pair,
    near_zero_mmd_pair_local,
    no_uniform_perturbation,
    spectral_verdict,
    tv_norm,
    verdict,
    zero_mmd_pair,
)

from conftest import random_kernel, random_space


def test_eigenvalues_match_operator(rng):
    space = random_space(rng, 8)
    k = random_kernel(rng, 8, space=space)
    m = mercer_decompose(k)
    # eigenvalues of f -> sum_y k(., y) f(y) nu(y), from the nonsymmetric matrix
    oracle = np.sort(np.linalg.eigvals(k.gram * space.nu[None, :]).real)[::-1]
    np.testing.assert_allclose(m.lambdas, oracle, rtol=1e-10, atol=1e-12 * oracle[0])


def test_expansion_orthonormal_and_reconstructs(rng):
    space = random_space(rng, 10)
    k = random_kernel(rng, 10, rank=4, space=space)
    m = mercer_decompose(k)
    G = (m.eigfuncs * space.nu) @ m.eigfuncs.T
    np.testing.assert_allclose(G, np.eye(10), atol=1e-12)
    np.testing.assert_allclose(m.reconstruct(), k.gram, atol=1e-11 * k.sup_norm)
    assert m.positive.sum() == 4


def test_constant_eigenfunction_found():
    g = GroupSpec((6,))
    gk = kernel_from_coeffs(g, [0.3, 1.0, 0.3, 0.3, 0.3, 1.0])
    m = mercer_decompose(gk.spec)
    # lambda_0 sits inside a degenerate cluster of eigenvalue 0.3 / 6 * 6
    assert m.index_of_one is not None
    np.testing.assert_allclose(m.eigfuncs[m.index_of_one], np.ones(6))
    assert m.lambdas[m.index_of_one] == pytest.approx(0.3)


def test_spectral_verdict_agrees_with_gram(rng):
    for rank in (3, 5, 6):
        k = random_kernel(rng, 6, rank=rank, space=random_space(rng, 6))
        a, b = verdict(k), spectral_verdict(mercer_decompose(k))
        assert (a.characteristic, a.universal) == (b.characteristic, b.universal)


def test_codimension_one_characteristic():
    # null direction is the constant function: characteristic but not universal
    s = DiscreteSpace.uniform(4)
    K = np.eye(4) - 0.25
    m = mercer_decompose(KernelSpec(s, K, symmetrize=True))
    v = spectral_verdict(m)
    assert (v.characteristic, v.universal) == ("yes", "no")
    assert any("constant" in r for r in v.reasons)


def test_mmd_spectral_oracle(rng):
    space = random_space(rng, 7)
    k = random_kernel(rng, 7, space=space)
    m = mercer_decompose(k)
    h = rng.uniform(0.1, 1, 7)
    g = rng.uniform(0.1, 1, 7)
    h, g = Density(space, h / (h @ space.nu)), Density(space, g / (g @ space.nu))
    d = density_to_measure(h) - density_to_measure(g)
    assert mmd_sq_spectral(m, h, g) == pytest.approx(mmd_sq(k, d), rel=1e-10)


@pytest.mark.parametrize("eps_tv", [0.1, 1.0, 1.9])
def test_zero_mmd_pair(rng, eps_tv):
    space = random_space(rng, 6)
    k = random_kernel(rng, 6, rank=2, space=space)
    m = mercer_decompose(k)
    P = Density(space, np.full(6, 1.0 / space.nu.sum()))
    h1, h2 = zero_mmd_pair(m, P, eps_tv)
    mu = density_to_measure(h1) - density_to_measure(h2)
    assert tv_norm(mu) == pytest.approx(eps_tv, abs=1e-10)
    assert mmd_sq(k, mu) <= 1e-12
    assert np.all(h1.h >= 0) and np.all(h2.h >= 0)


def test_zero_mmd_pair_universal_kernel_refused(rng):
    k = random_kernel(rng, 5)
    with pytest.raises(PreconditionError, match="null direction"):
        zero_mmd_pair(mercer_decompose(k), Density.uniform(k.space), 0.5)


def test_near_zero_pair_flat_spectrum_refused():
    k = KernelSpec(DiscreteSpace.uniform(4), np.eye(4))
    with pytest.raises(PreconditionError, match="spectrum too flat"):
        near_zero_mmd_pair(mercer_decompose(k), 0.05)


def test_near_zero_pair_decaying_spectrum():
    s = DiscreteSpace.uniform(12)
    x = np.arange(12)
    K = np.exp(-0.5 * (x[:, None] - x[None, :]) ** 2 / 9.0)
    k = KernelSpec(s, K)
    Q1, Q2 = near_zero_mmd_pair(mercer_decompose(k), 0.05)
    assert tv_norm(Q1 - Q2) == pytest.approx(2.0, abs=1e-12)
    assert np.sqrt(mmd_sq(k, Q1 - Q2)) <= 0.05


def test_near_zero_local():
    s = DiscreteSpace.uniform(12)
    x = np.arange(12)
    k = KernelSpec(s, np.exp(-0.5 * (x[:, None] - x[None, :]) ** 2 / 9.0))
    P = SignedMeasure(s, np.full(12, 1 / 12))
    Q1, Q2 = near_zero_mmd_pair_local(mercer_decompose(k), P, 0.4, 0.02)
    assert tv_norm(Q1 - Q2) == pytest.approx(0.4, abs=1e-12)
    assert tv_norm(Q1 - P) <= 0.4 + 1e-12
    assert np.sqrt(mmd_sq(k, Q1 - Q2)) <= 0.02


def test_no_uniform_perturbation():
    g = GroupSpec((10,))
    gk = kernel_from_coeffs(g, [1, 0.5, 0.3, 0.2, 0.1, 0.05, 0.1, 0.2, 0.3, 0.5])
    m = mercer_decompose(gk.spec)
    ref = SignedMeasure(m.space, m.space.nu)
    for j in range(10):
        if j == m.index_of_one:
            with pytest.raises(PreconditionError):
                no_uniform_perturbation(m, j)
            continue
        res = no_uniform_perturbation(m, j)
        assert res.Q.is_probability
        assert tv_norm(ref - res.Q) >= res.tv_lower
        assert mmd_sq(gk.spec, ref - res.Q) == pytest.approx(res.mmd_sq_exact, abs=1e-12)


def test_no_uniform_needs_constant_eigenfunction(rng):
    k = random_kernel(rng, 5)
    with pytest.raises(PreconditionError):
        no_uniform_perturbation(mercer_decompose(k), 1)


def test_translation_invariant_z16_cannot_reach_small_eps():
    # after symmetrization the smallest nonzero-frequency coefficient is 2^-8, and
    # Parseval gives sqrt(mmd_sq) >= 2 sqrt(2^-8) for any pair at TV distance 2
    g = GroupSpec((16,))
    lam = 0.5 ** np.arange(16)
    gk = kernel_from_coeffs(g, np.maximum(lam, lam[g.negation]))
    with pytest.raises(PreconditionError, match="spectrum too flat") as info:
        near_zero_mmd_pair(mercer_decompose(gk.spec), 0.05)
    best = float(str(info.value).split("best attainable ")[1].rstrip(")"))
    assert best >= 2 * np.sqrt(2.0**-8) - 1e-12
    Q1, Q2 = near_zero_mmd_pair(mercer_decompose(gk.spec), best * (1 + 1e-9))
    assert tv_norm(Q1 - Q2) == pytest.approx(2.0)
