"""
    Dense kernels with reverse-mode differentiation, losses and the Adam optimizer

Every operation returns a Tensor that remembers its parents and a closure
propagating the output gradient back to them. Calling backward() on a scalar
tensor walks the recorded graph in reverse topological order and accumulates
exact gradients into every participating Parameter.
"""

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit, log_softmax, softmax

from .exceptions import InvalidInputException, NumericException

log = logging.getLogger(__name__)


class Tensor:
    """
    A 2-D float64 matrix taking part in a differentiable computation
    """

    def __init__(
        self,
        data: Union[np.ndarray, float],
        parents: tuple["Tensor", ...] = (),
        op: str = "",
    ):
        array = np.asarray(data, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        if array.ndim != 2:
            raise InvalidInputException(f"Tensor must be 2-D, got shape {array.shape}")
        self.data = array
        self.grad: Optional[np.ndarray] = None
        self.parents = parents
        self.op = op
        self._backward: Callable[[np.ndarray], None] = lambda _: None
        self._requires_grad = any(x.requires_grad for x in parents)

    @property
    def requires_grad(self) -> bool:
        return self._requires_grad

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape  # type: ignore[return-value]

    def item(self) -> float:
        if self.data.size != 1:
            raise InvalidInputException(f"item() on a tensor of shape {self.shape}")
        return float(self.data[0, 0])

    def accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """
        Back-propagate from this scalar through the recorded graph
        """
        if self.data.size != 1:
            raise InvalidInputException("backward() needs a scalar tensor")
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if id(parent) not in visited and parent.requires_grad:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node.grad is not None:
                node._backward(node.grad)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.shape[0]}x{self.shape[1]}, op={self.op!r})"


class Parameter(Tensor):
    """
    A named leaf tensor updated by the optimizer unless frozen
    """

    def __init__(
        self, data: Union[np.ndarray, float], name: str = "", trainable: bool = True
    ):
        super().__init__(data)
        self.name = name
        self.trainable = trainable

    @property
    def requires_grad(self) -> bool:
        return self.trainable

    def __repr__(self) -> str:
        frozen = "" if self.trainable else ", frozen"
        return f"{self.__class__.__name__}({self.name}, {self.shape[0]}x{self.shape[1]}{frozen})"


def _result(data: np.ndarray, parents: tuple[Tensor, ...], op: str) -> Tensor:
    if not np.isfinite(data).all():
        raise NumericException(f"Non-finite values produced by {op}")
    return Tensor(data, parents, op)


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidInputException(message)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    _check(a.shape[1] == b.shape[0], f"matmul shape mismatch {a.shape} @ {b.shape}")
    out = _result(a.data @ b.data, (a, b), "matmul")

    def backward(grad: np.ndarray) -> None:
        a.accumulate(grad @ b.data.T)
        b.accumulate(a.data.T @ grad)

    out._backward = backward
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    _check(a.shape == b.shape, f"add shape mismatch {a.shape} + {b.shape}")
    out = _result(a.data + b.data, (a, b), "add")

    def backward(grad: np.ndarray) -> None:
        a.accumulate(grad)
        b.accumulate(grad)

    out._backward = backward
    return out


def add_bias(x: Tensor, bias: Tensor) -> Tensor:
    _check(
        bias.shape == (1, x.shape[1]), f"bias of shape {bias.shape} for input {x.shape}"
    )
    out = _result(x.data + bias.data, (x, bias), "add_bias")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(grad)
        bias.accumulate(grad.sum(axis=0, keepdims=True))

    out._backward = backward
    return out


def relu(x: Tensor) -> Tensor:
    positive = x.data > 0
    out = _result(np.where(positive, x.data, 0.0), (x,), "relu")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(grad * positive)

    out._backward = backward
    return out


def dropout(
    x: Tensor, p: float, rng: Optional[np.random.Generator], train: bool
) -> Tensor:
    """
    Inverted dropout: in train mode every entry is zeroed with probability p
    and the survivors are scaled by 1 / (1 - p); otherwise the identity
    """
    _check(0.0 <= p < 1.0, f"dropout probability must be in [0, 1), got {p}")
    if not train or p == 0.0:
        return x
    if rng is None:
        raise InvalidInputException("dropout in train mode needs a random generator")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    out = _result(x.data * mask, (x,), "dropout")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(grad * mask)

    out._backward = backward
    return out


@dataclass
class BatchNormState:
    """
    Running statistics of a batch normalization layer
    """

    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.1
    eps: float = 1e-5
    frozen: bool = False

    @classmethod
    def fresh(cls, width: int) -> "BatchNormState":
        return cls(np.zeros((1, width)), np.ones((1, width)))


def batch_norm(
    x: Tensor, gamma: Tensor, beta: Tensor, state: BatchNormState, train: bool
) -> Tensor:
    """
    Normalize every column. Train mode uses batch statistics and updates the
    running averages (unless the state is frozen, in which case the running
    statistics are used as in eval mode).
    """
    _check(
        gamma.shape == beta.shape == (1, x.shape[1]),
        f"batch norm parameters do not match input {x.shape}",
    )
    use_batch = train and not state.frozen and x.shape[0] > 1
    if use_batch:
        mean = x.data.mean(axis=0, keepdims=True)
        var = x.data.var(axis=0, keepdims=True)
        count = x.shape[0]
        keep = 1 - state.momentum
        state.running_mean = keep * state.running_mean + state.momentum * mean
        # running variance is unbiased
        unbiased = var * count / (count - 1)
        state.running_var = keep * state.running_var + state.momentum * unbiased
    else:
        mean, var = state.running_mean, state.running_var
    inv_std = 1.0 / np.sqrt(var + state.eps)
    normalized = (x.data - mean) * inv_std
    out = _result(normalized * gamma.data + beta.data, (x, gamma, beta), "batch_norm")

    def backward(grad: np.ndarray) -> None:
        gamma.accumulate((grad * normalized).sum(axis=0, keepdims=True))
        beta.accumulate(grad.sum(axis=0, keepdims=True))
        dnorm = grad * gamma.data
        if use_batch:
            count = grad.shape[0]
            x.accumulate(
                inv_std
                / count
                * (
                    count * dnorm
                    - dnorm.sum(axis=0, keepdims=True)
                    - normalized * (dnorm * normalized).sum(axis=0, keepdims=True)
                )
            )
        else:
            x.accumulate(dnorm * inv_std)

    out._backward = backward
    return out


def sparse_matmul(matrix: sp.spmatrix, x: Tensor) -> Tensor:
    """
    Multiply a constant sparse matrix with a tensor
    """
    _check(
        matrix.shape[1] == x.shape[0],
        f"sparse matmul mismatch {matrix.shape} @ {x.shape}",
    )
    csr = sp.csr_matrix(matrix)
    out = _result(np.asarray(csr @ x.data), (x,), "sparse_matmul")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(np.asarray(csr.T @ grad))

    out._backward = backward
    return out


def scale_by_one_plus(x: Tensor, epsilon: Tensor) -> Tensor:
    """
    :return: (1 + epsilon) * x for a 1x1 tensor epsilon
    """
    _check(epsilon.shape == (1, 1), "epsilon must be a scalar")
    factor = 1.0 + epsilon.data[0, 0]
    out = _result(x.data * factor, (x, epsilon), "scale")

    def backward(grad: np.ndarray) -> None:
        x.accumulate(grad * factor)
        epsilon.accumulate(np.array([[np.sum(grad * x.data)]]))

    out._backward = backward
    return out


def take_rows(x: Tensor, rows: np.ndarray) -> Tensor:
    out = _result(x.data[rows], (x,), "take_rows")

    def backward(grad: np.ndarray) -> None:
        full = np.zeros_like(x.data)
        np.add.at(full, rows, grad)
        x.accumulate(full)

    out._backward = backward
    return out


def softmax_cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """
    Mean negative log-likelihood of the true classes under a row-wise softmax
    """
    count, classes = logits.shape
    labels = np.asarray(labels, dtype=np.int64)
    _check(labels.shape == (count,), f"{labels.shape[0]} labels for {count} rows")
    _check(count > 0, "cross entropy of an empty batch")
    _check(
        bool(labels.min() >= 0 and labels.max() < classes),
        f"labels outside [0, {classes})",
    )
    log_probs = log_softmax(logits.data, axis=1)
    loss = -log_probs[np.arange(count), labels].mean()
    out = _result(np.array([[loss]]), (logits,), "cross_entropy")

    def backward(grad: np.ndarray) -> None:
        delta = softmax(logits.data, axis=1)
        delta[np.arange(count), labels] -= 1.0
        logits.accumulate(delta * (grad[0, 0] / count))

    out._backward = backward
    return out


def binary_logistic_loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    """
    Mean binary cross entropy of a single logit per row
    """
    count = logits.shape[0]
    labels = np.asarray(labels, dtype=np.float64)
    _check(
        logits.shape == (count, 1), f"expected one logit per row, got {logits.shape}"
    )
    _check(labels.shape == (count,), f"{labels.shape[0]} labels for {count} rows")
    _check(count > 0, "logistic loss of an empty batch")
    _check(bool(np.isin(labels, (0.0, 1.0)).all()), "labels must be 0 or 1")
    z = logits.data[:, 0]
    # log(1 + exp(-|z|)) + max(z, 0) - y z
    loss = np.mean(np.logaddexp(0.0, z) - labels * z)
    out = _result(np.array([[loss]]), (logits,), "logistic")

    def backward(grad: np.ndarray) -> None:
        logits.accumulate(((expit(z) - labels) * (grad[0, 0] / count)).reshape(-1, 1))

    out._backward = backward
    return out


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class AdamState:
    """
    Moment estimates of the Adam optimizer, keyed by parameter name
    """

    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(params: Sequence[Parameter], state: AdamState, lr: float) -> None:
    """
    One bias-corrected Adam update of every trainable parameter, in place.
    Missing gradients count as zero. Gradients are cleared afterwards.
    """
    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for param in params:
        if not param.trainable:
            param.zero_grad()
            continue
        grad = param.grad if param.grad is not None else np.zeros_like(param.data)
        first = state.first.setdefault(param.name, np.zeros_like(param.data))
        second = state.second.setdefault(param.name, np.zeros_like(param.data))
        first *= state.beta1
        first += (1.0 - state.beta1) * grad
        second *= state.beta2
        second += (1.0 - state.beta2) * grad * grad
        param.data -= lr * (first / correction1) / (
            np.sqrt(second / correction2) + state.eps
        )
        param.zero_grad()


class Adam:
    """
    Adam optimizer bound to a set of parameters
    """

    def __init__(self, params: Iterable[Parameter], lr: float = 0.001):
        self.params = list(params)
        names = [x.name for x in self.params]
        if len(set(names)) != len(names):
            raise InvalidInputException("Adam needs uniquely named parameters")
        self.lr = lr
        self.state = AdamState()

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()

    def step(self) -> None:
        adam_step(self.params, self.state, self.lr)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({len(self.params)} parameters, lr={self.lr})"


def gradient_check(
    model_fn: Callable[[], Tensor], params: Sequence[Parameter], h: float = 1e-5
) -> float:
    """
    Compare the analytic gradient of a deterministic scalar function with
    central finite differences over every coordinate of every parameter.

    :return: the worst relative error |a - n| / max(|a| + |n|, 1e-3)

    Raises:
        NumericException: if the function or a gradient is not finite
    """
    for param in params:
        param.zero_grad()
    loss = model_fn()
    if not np.isfinite(loss.data).all():
        raise NumericException("Non-finite loss in gradient check")
    loss.backward()
    analytic = [
        np.zeros_like(x.data) if x.grad is None else x.grad.copy() for x in params
    ]
    worst = 0.0
    for param, grad in zip(params, analytic):
        if not np.isfinite(grad).all():
            raise NumericException(f"Non-finite gradient for {param!r}")
        for index in np.ndindex(*param.shape):
            original = param.data[index]
            param.data[index] = original + h
            upper = model_fn().item()
            param.data[index] = original - h
            lower = model_fn().item()
            param.data[index] = original
            numeric = (upper - lower) / (2 * h)
            if not np.isfinite(numeric):
                raise NumericException(f"Non-finite finite difference for {param!r}")
            error = abs(grad[index] - numeric) / max(
                abs(grad[index]) + abs(numeric), 1e-3
            )
            worst = max(worst, error)
    for param in params:
        param.zero_grad()
    log.debug(
        "Gradient check over %d parameters: worst relative error %.3g",
        len(params),
        worst,
    )
    return worst
