"""Minimal reverse-mode automatic differentiation over numpy arrays.

Tape-based: every operation records its parents and a backward closure;
``backward()`` walks the graph in reverse topological order. 64-bit floats
throughout. Only the operations the training loop needs are provided.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad, shape):
    """Sum grad down to the given broadcast-source shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "_parents", "_backward", "requires_grad")

    def __init__(self, data, parents=(), backward=None, requires_grad=False):
        self.data = np.asarray(data, dtype=float)
        self.grad = None
        self._parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)

    @property
    def shape(self):
        return self.data.shape

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        order = []
        seen = set()

        def visit(node):
            if id(node) in seen:
                return
            seen.add(id(node))
            for p in node._parents:
                visit(p)
            order.append(node)

        visit(self)
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward is not None and node.requires_grad:
                node._backward()

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data + other.data, (self, other))

        def backward():
            if self.requires_grad:
                self._accumulate(_unbroadcast(out.grad, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(out.grad, other.shape))

        out._backward = backward
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Tensor(-self.data, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(-out.grad)

        out._backward = backward
        return out

    def __sub__(self, other):
        return self + (-_as_tensor(other))

    def __rsub__(self, other):
        return _as_tensor(other) + (-self)

    def __mul__(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data * other.data, (self, other))

        def backward():
            if self.requires_grad:
                self._accumulate(_unbroadcast(out.grad * other.data, self.shape))
            if other.requires_grad:
                other._accumulate(_unbroadcast(out.grad * self.data, other.shape))

        out._backward = backward
        return out

    __rmul__ = __mul__

    def __matmul__(self, other):
        other = _as_tensor(other)
        out = Tensor(self.data @ other.data, (self, other))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad @ other.data.T)
            if other.requires_grad:
                other._accumulate(self.data.T @ out.grad)

        out._backward = backward
        return out

    @property
    def T(self):
        out = Tensor(self.data.T, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad.T)

        out._backward = backward
        return out

    def __getitem__(self, index):
        out = Tensor(self.data[index], (self,))

        def backward():
            if self.requires_grad:
                grad = np.zeros_like(self.data)
                np.add.at(grad, index, out.grad)
                self._accumulate(grad)

        out._backward = backward
        return out

    # -- reductions and nonlinearities --------------------------------------

    def sum(self):
        out = Tensor(self.data.sum(), (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(np.full_like(self.data, float(out.grad)))

        out._backward = backward
        return out

    def mean(self):
        out = Tensor(self.data.mean(), (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(np.full_like(self.data, float(out.grad) / self.data.size))

        out._backward = backward
        return out

    def tanh(self):
        value = np.tanh(self.data)
        out = Tensor(value, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad * (1.0 - value * value))

        out._backward = backward
        return out

    def sigmoid(self):
        value = 1.0 / (1.0 + np.exp(-self.data))
        out = Tensor(value, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad * value * (1.0 - value))

        out._backward = backward
        return out

    def relu(self):
        mask = self.data > 0
        out = Tensor(np.where(mask, self.data, 0.0), (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad * mask)

        out._backward = backward
        return out

    def softplus(self):
        # log(1 + exp(x)), stable for large |x|
        value = np.logaddexp(0.0, self.data)
        out = Tensor(value, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad / (1.0 + np.exp(-self.data)))

        out._backward = backward
        return out

    def square(self):
        return self * self

    def sqrt(self):
        value = np.sqrt(self.data)
        out = Tensor(value, (self,))

        def backward():
            if self.requires_grad:
                self._accumulate(out.grad * 0.5 / value)

        out._backward = backward
        return out

    def max_over(self, axis):
        """Max-reduction; gradient flows to the (first) argmax entries."""
        value = self.data.max(axis=axis)
        argmax = np.expand_dims(self.data.argmax(axis=axis), axis)
        out = Tensor(value, (self,))

        def backward():
            if self.requires_grad:
                grad = np.zeros_like(self.data)
                np.put_along_axis(grad, argmax, np.expand_dims(out.grad, axis), axis)
                self._accumulate(grad)

        out._backward = backward
        return out


def _as_tensor(value):
    return value if isinstance(value, Tensor) else Tensor(value)


def parameter(data):
    return Tensor(np.array(data, dtype=float), requires_grad=True)


def concat(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]

    def backward():
        offset = 0
        for t, size in zip(tensors, sizes):
            if t.requires_grad:
                index = [slice(None)] * out.grad.ndim
                index[axis] = slice(offset, offset + size)
                t._accumulate(out.grad[tuple(index)])
            offset += size

    out._backward = backward
    return out


def stack(tensors, axis=0):
    tensors = [_as_tensor(t) for t in tensors]
    out = Tensor(np.stack([t.data for t in tensors], axis=axis), tuple(tensors))

    def backward():
        grads = np.moveaxis(out.grad, axis, 0)
        for t, g in zip(tensors, grads):
            if t.requires_grad:
                t._accumulate(g)

    out._backward = backward
    return out
