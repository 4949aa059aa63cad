import numpy as np
import pytest

from identconcepts import generators as gen
from identconcepts.encoder import (
    FaithfulEncoderOracle,
    embed,
    encoder_jacobian,
    identity_mixing,
    orthonormal_mixing,
    sample_mixing,
)

KINDS = ["fourbars", "fourbars_nemr", "colorbar"]


def points(k, n, seed):
    return np.random.default_rng(seed).uniform(0.1, 0.9, (n, k))


def test_sample_mixing_contract():
    m = sample_mixing(2, seed=3)
    assert m.d.shape == (2, 2)
    assert np.linalg.cond(m.d) <= 20
    assert np.all(np.abs(m.d) <= 1)
    np.testing.assert_array_equal(sample_mixing(4, seed=7).d, sample_mixing(4, seed=7).d)


def test_sample_mixing_bound_too_tight():
    with pytest.raises(ValueError, match="condition"):
        sample_mixing(3, seed=0, max_condition=1.0)
    with pytest.raises(ValueError):
        sample_mixing(1, seed=0)


def test_orthonormal_mixing():
    q = orthonormal_mixing(5, seed=1).d
    np.testing.assert_allclose(q.T @ q, np.eye(5), atol=1e-12)


def test_embed_is_linear_map():
    spec = gen.GeneratorSpec("fourbars")
    oracle = FaithfulEncoderOracle(spec, identity_mixing(4))
    z = np.array([0.2, 0.3, 0.4, 0.5])
    np.testing.assert_array_equal(embed(oracle, z), z)
    np.testing.assert_array_equal(embed(oracle, np.zeros(4)), np.zeros(4))
    d = sample_mixing(4, seed=2)
    oracle = FaithfulEncoderOracle(spec, d)
    np.testing.assert_allclose(oracle.embed(z), d.d @ z, rtol=1e-15)
    zs = points(4, 5, 0)
    np.testing.assert_allclose(oracle.embed(zs), zs @ d.d.T)


def test_oracle_rejects_wrong_k_and_negative_noise():
    spec = gen.GeneratorSpec("colorbar")
    with pytest.raises(ValueError):
        FaithfulEncoderOracle(spec, sample_mixing(4, seed=0))
    with pytest.raises(ValueError):
        FaithfulEncoderOracle(spec, sample_mixing(3, seed=0), noise_sigma=-1.0)
    with pytest.raises(ValueError):
        FaithfulEncoderOracle(spec, sample_mixing(3, seed=0), noise_scale="relative")


@pytest.mark.parametrize("kind", KINDS)
def test_faithfulness_identity(kind):
    spec = gen.GeneratorSpec(kind)
    d = sample_mixing(spec.n_components, seed=11)
    oracle = FaithfulEncoderOracle(spec, d)
    for z in points(spec.n_components, 20, 1):
        j_f = encoder_jacobian(oracle, z).matrix
        j_g = gen.jacobian(spec, z).matrix
        assert np.linalg.norm(j_f @ j_g - d.d) <= 1e-8 * np.linalg.norm(d.d)


@pytest.mark.parametrize("kind", KINDS)
def test_kernel_invariance(kind):
    spec = gen.GeneratorSpec(kind)
    oracle = FaithfulEncoderOracle(spec, sample_mixing(spec.n_components, seed=5))
    rng = np.random.default_rng(2)
    z = points(spec.n_components, 1, 3)[0]
    j_f = oracle.jacobian(z).matrix
    j_g = gen.jacobian(spec, z).matrix
    q, _ = np.linalg.qr(j_g)
    for _ in range(20):
        v = rng.standard_normal(spec.n_pixels)
        v -= q @ (q.T @ v)
        assert np.linalg.norm(j_f @ v) <= 1e-8 * np.linalg.norm(j_f) * np.linalg.norm(v)


@pytest.mark.parametrize("kind", KINDS)
def test_unmixed_rows_are_proportional_to_generator_columns(kind):
    spec = gen.GeneratorSpec(kind)
    d = sample_mixing(spec.n_components, seed=9)
    oracle = FaithfulEncoderOracle(spec, d)
    for z in points(spec.n_components, 5, 4):
        rows = np.linalg.solve(d.d, oracle.jacobian(z).matrix)
        cols = gen.jacobian(spec, z).matrix.T
        cos = np.sum(rows * cols, axis=1) / (np.linalg.norm(rows, axis=1) * np.linalg.norm(cols, axis=1))
        assert np.all(cos > 1 - 1e-8)


def test_noise_is_deterministic_per_point():
    spec = gen.GeneratorSpec("fourbars")
    d = sample_mixing(4, seed=0)
    a = FaithfulEncoderOracle(spec, d, noise_sigma=0.1, seed=4)
    b = FaithfulEncoderOracle(spec, d, noise_sigma=0.1, seed=4)
    z = np.array([0.3, 0.4, 0.5, 0.6])
    np.testing.assert_array_equal(a.jacobian(z).matrix, b.jacobian(z).matrix)
    other = FaithfulEncoderOracle(spec, d, noise_sigma=0.1, seed=5)
    assert not np.array_equal(a.jacobian(z).matrix, other.jacobian(z).matrix)
    clean = FaithfulEncoderOracle(spec, d).jacobian(z).matrix
    resid = a.jacobian(z).matrix - clean
    assert abs(resid.std() - 0.1) < 0.01


def test_peak_noise_scales_with_jacobian():
    spec = gen.GeneratorSpec("fourbars")
    d = sample_mixing(4, seed=0)
    z = np.array([0.3, 0.4, 0.5, 0.6])
    clean = FaithfulEncoderOracle(spec, d).jacobian(z).matrix
    noisy = FaithfulEncoderOracle(spec, d, noise_sigma=0.1, noise_scale="peak").jacobian(z).matrix
    ratio = (noisy - clean).std() / np.max(np.abs(clean))
    assert abs(ratio - 0.1) < 0.01


def test_jacobian_stack_shape():
    spec = gen.GeneratorSpec("colorbar")
    oracle = FaithfulEncoderOracle(spec, sample_mixing(3, seed=1))
    stack = oracle.jacobians(points(3, 6, 0))
    assert stack.shape == (6, 3, 256)
