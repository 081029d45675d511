import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracnn.network import (NetParams, forward, init_params, load_params,
                             logistic, save_params, softplus)


def test_same_seed_same_parameters():
    a = init_params(11, "fully_connected")
    b = init_params(11, "fully_connected")
    for x, y in zip(a.flat_arrays(), b.flat_arrays()):
        assert np.array_equal(x, y)


def test_different_seeds_differ():
    a = init_params(0, "fully_connected")
    b = init_params(1, "fully_connected")
    assert any(not np.array_equal(x, y)
               for x, y in zip(a.flat_arrays(), b.flat_arrays()))


def test_biases_zero_at_init():
    p = init_params(3, "split_two_head")
    for head in p.heads:
        for _W, b in head:
            assert np.array_equal(b, np.zeros_like(b))


def test_init_scale_bounds():
    p = init_params(7, "fully_connected", hidden=16)
    (W1, _), (W2, _), (W3, _) = p.heads[0]
    assert np.max(np.abs(W1)) <= np.sqrt(6.0 / 17.0)
    assert np.max(np.abs(W2)) <= np.sqrt(6.0 / 32.0)
    assert np.max(np.abs(W3)) <= np.sqrt(6.0 / 17.0)


def test_parameter_counts():
    fc = init_params(0, "fully_connected", hidden=16)
    split = init_params(0, "split_two_head", hidden=16)
    size = lambda p: sum(a.size for a in p.flat_arrays())
    assert size(fc) == 16 + 16 + 256 + 16 + 16 + 1
    assert size(split) == 2 * size(fc)


def test_softplus_at_zero():
    assert softplus(np.array([0.0]))[0] == pytest.approx(np.log(2.0), abs=1e-15)


def test_softplus_overflow_safe():
    z = np.array([-800.0, 800.0])
    out = softplus(z)
    assert out[0] == 0.0
    assert out[1] == 800.0
    assert np.all(np.isfinite(logistic(z)))


@given(z=st.floats(-30.0, 30.0))
@settings(max_examples=50, deadline=None)
def test_logistic_is_softplus_slope(z):
    h = 1e-6
    fd = (softplus(np.array([z + h])) - softplus(np.array([z - h])))[0] / (2 * h)
    assert logistic(np.array([z]))[0] == pytest.approx(fd, abs=1e-7)
    assert 0.0 < logistic(np.array([z]))[0] < 1.0


def test_constant_output_from_zero_weights():
    p = init_params(0, "fully_connected")
    for W, b in p.heads[0]:
        W[:] = 0.0
        b[:] = 0.0
    p.heads[0][-1][1][:] = 4.25     # output bias
    r = np.linspace(0.1, 20, 57)
    out = forward(p, r)
    np.testing.assert_allclose(out, 4.25, rtol=0, atol=0)


def test_batched_equals_pointwise():
    p = init_params(9, "fully_connected")
    r = np.linspace(0.01, 30.0, 101)
    batched = forward(p, r)
    pointwise = np.array([forward(p, np.array([x]))[0] for x in r])
    np.testing.assert_allclose(batched, pointwise, atol=1e-12)


def test_split_heads_are_independent():
    p = init_params(4, "split_two_head")
    r = np.linspace(0.1, 10, 31)
    base = forward(p, r)
    assert base.shape == (2, len(r))
    # perturbing head 1 must leave head 0 untouched
    p.heads[1][0][0][0, 0] += 0.5
    after = forward(p, r)
    assert np.array_equal(base[0], after[0])
    assert not np.array_equal(base[1], after[1])


def test_output_sign_unbounded():
    # affine output: flipping the last-layer weights flips the output
    p = init_params(2, "fully_connected")
    r = np.linspace(0.1, 5, 11)
    out = forward(p, r)
    W3, b3 = p.heads[0][-1]
    W3 *= -1.0
    b3 *= -1.0
    np.testing.assert_allclose(forward(p, r), -out, atol=1e-14)


def test_checkpoint_roundtrip(tmp_path):
    for arch in ("fully_connected", "split_two_head"):
        p = init_params(21, arch, hidden=8)
        path = tmp_path / f"{arch}.ckpt"
        save_params(p, path)
        q = load_params(path)
        assert q.architecture == arch
        for x, y in zip(p.flat_arrays(), q.flat_arrays()):
            assert np.array_equal(x, y)


def test_unknown_architecture_rejected():
    with pytest.raises(ValueError):
        init_params(0, "transformer")
    with pytest.raises(ValueError):
        NetParams("mlp9000", [])
