import numpy as np
import pytest

from crowdnav.autodiff import Tensor, concat, parameter, stack


def _fd_grad(fn, x, eps=1e-6):
    """Central finite differences of scalar fn at ndarray x."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + eps
        hi = fn()
        x[idx] = orig - eps
        lo = fn()
        x[idx] = orig
        grad[idx] = (hi - lo) / (2 * eps)
        it.iternext()
    return grad


def _check(build, x):
    """build(param) -> scalar Tensor; compares backprop grad against FD."""
    p = parameter(x)
    loss = build(p)
    loss.backward()
    fd = _fd_grad(lambda: float(build(parameter(p.data)).data), p.data)
    assert np.allclose(p.grad, fd, rtol=1e-4, atol=1e-7), (p.grad, fd)


def test_backward_requires_scalar():
    p = parameter(np.ones(3))
    with pytest.raises(ValueError):
        p.backward()


def test_add_mul_broadcast_grad():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (3, 4))
    b = rng.uniform(-1, 1, (4,))
    _check(lambda p: ((p + b) * 2.0).sum(), x.copy())
    _check(lambda p: ((Tensor(x) * p).mean()), b.copy())


def test_matmul_and_transpose_grad():
    rng = np.random.default_rng(1)
    w = rng.uniform(-1, 1, (4, 3))
    x = rng.uniform(-1, 1, (2, 3))
    _check(lambda p: (Tensor(x) @ p.T).sum(), w.copy())
    _check(lambda p: (p @ Tensor(w.T)).mean(), x.copy())


def test_nonlinearity_grads():
    rng = np.random.default_rng(2)
    x = rng.uniform(-2, 2, (3, 3))
    _check(lambda p: p.tanh().sum(), x.copy())
    _check(lambda p: p.sigmoid().mean(), x.copy())
    _check(lambda p: p.softplus().sum(), x.copy())
    _check(lambda p: p.square().sum(), x.copy())
    _check(lambda p: (p.square() + 1.0).sqrt().sum(), x.copy())


def test_relu_grad_off_kink():
    x = np.array([[-1.5, 0.5], [2.0, -0.25]])
    _check(lambda p: p.relu().sum(), x.copy())


def test_getitem_grad():
    rng = np.random.default_rng(3)
    x = rng.uniform(-1, 1, (4, 5))
    _check(lambda p: (p[1:3, ::2] * 3.0).sum(), x.copy())


def test_max_over_grad_routes_to_argmax():
    x = np.array([[1.0, 3.0, 2.0], [0.5, -1.0, 4.0]])
    p = parameter(x)
    p.max_over(axis=1).sum().backward()
    assert np.array_equal(p.grad, [[0, 1, 0], [0, 0, 1]])


def test_concat_and_stack_grads():
    rng = np.random.default_rng(4)
    a = rng.uniform(-1, 1, (2, 3))
    _check(lambda p: concat([p, Tensor(a)], axis=1).sum(), a.copy())
    _check(lambda p: stack([p, p * 2.0], axis=0).mean(), a.copy())


def test_grad_accumulates_over_reuse():
    p = parameter(np.array([2.0]))
    loss = (p * p + p * 3.0).sum()  # d/dp = 2p + 3 = 7
    loss.backward()
    assert p.grad[0] == pytest.approx(7.0)


def test_softplus_stable_for_large_inputs():
    p = parameter(np.array([800.0, -800.0]))
    out = p.softplus()
    assert np.all(np.isfinite(out.data))
    assert out.data[0] == pytest.approx(800.0)
    assert out.data[1] == pytest.approx(0.0, abs=1e-12)
