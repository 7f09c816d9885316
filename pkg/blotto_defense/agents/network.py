"""
Minimal convolutional Q-network in numpy
Two 2x2 stride-1 valid convolutions, two fully connected layers,
exact reverse-mode gradients and a central-difference gradient check
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Iterator, NamedTuple, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .. import config
from ..errors import ShapeMismatchError

logger = logging.getLogger(__name__)

KERNEL = 2

LAYER_NAMES = ('conv1_w', 'conv1_b', 'conv2_w', 'conv2_b', 'fc1_w', 'fc1_b', 'fc2_w', 'fc2_b')

Gradients = Dict[str, np.ndarray]


@dataclass(frozen=True, eq=False)
class NetworkParams:
    """
    Weights and biases in declared layer order

    conv weights are (filters, in_channels, 2, 2); fc weights are (fan_in, fan_out).
    """

    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray
    input_side: int
    relu_output: bool = False

    def __post_init__(self):
        expected = layer_shapes(self.input_side, self.conv1_w.shape[0], self.conv2_w.shape[0],
                                self.fc1_w.shape[1], self.fc2_w.shape[1])
        for name in LAYER_NAMES:
            if getattr(self, name).shape != expected[name]:
                raise ShapeMismatchError(
                    f"{name} has shape {getattr(self, name).shape}, expected {expected[name]}"
                )

    def arrays(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in LAYER_NAMES:
            yield name, getattr(self, name)

    @property
    def action_count(self) -> int:
        return self.fc2_w.shape[1]

    @property
    def parameter_count(self) -> int:
        return sum(a.size for _, a in self.arrays())

    def copy(self) -> 'NetworkParams':
        return replace(self, **{name: array.copy() for name, array in self.arrays()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for _, a in self.arrays())


def layer_shapes(input_side: int, conv1: int, conv2: int, hidden: int,
                 actions: int) -> Dict[str, Tuple[int, ...]]:
    """Shape chain side -> side-1 -> side-2 -> flatten -> hidden -> actions"""
    if input_side < KERNEL + 1:
        raise ShapeMismatchError(f"input side must be >= {KERNEL + 1}, got {input_side}")
    flat = conv2 * (input_side - 2) ** 2
    return {
        'conv1_w': (conv1, 1, KERNEL, KERNEL),
        'conv1_b': (conv1,),
        'conv2_w': (conv2, conv1, KERNEL, KERNEL),
        'conv2_b': (conv2,),
        'fc1_w': (flat, hidden),
        'fc1_b': (hidden,),
        'fc2_w': (hidden, actions),
        'fc2_b': (actions,),
    }


def init_params(input_side: int, actions: int, rng: np.random.Generator,
                conv1: int = config.CONV1_FILTERS, conv2: int = config.CONV2_FILTERS,
                hidden: int = config.HIDDEN_UNITS, relu_output: bool = False) -> NetworkParams:
    """Glorot-uniform weights, zero biases"""
    shapes = layer_shapes(input_side, conv1, conv2, hidden, actions)
    arrays = {}
    for name in LAYER_NAMES:
        shape = shapes[name]
        if name.endswith('_b'):
            arrays[name] = np.zeros(shape)
            continue
        if len(shape) == 4:
            fan_in, fan_out = shape[1] * KERNEL * KERNEL, shape[0] * KERNEL * KERNEL
        else:
            fan_in, fan_out = shape
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        arrays[name] = rng.uniform(-limit, limit, size=shape)
    return NetworkParams(**arrays, input_side=input_side, relu_output=relu_output)


class ForwardCache(NamedTuple):
    x: np.ndarray
    windows1: np.ndarray
    z1: np.ndarray
    windows2: np.ndarray
    z2: np.ndarray
    flat: np.ndarray
    z3: np.ndarray
    a3: np.ndarray
    z4: np.ndarray

    def preactivations(self) -> Iterator[np.ndarray]:
        yield self.z1
        yield self.z2
        yield self.z3
        yield self.z4


def _as_batch(x: np.ndarray, side: int) -> Tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 2
    if single:
        x = x[None, None]
    elif x.ndim == 3:
        x = x[:, None]
    if x.ndim != 4 or x.shape[1] != 1 or x.shape[2:] != (side, side):
        raise ShapeMismatchError(f"input shape {x.shape} does not match side {side}")
    return x, single


def _conv(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    windows = sliding_window_view(x, (KERNEL, KERNEL), axis=(2, 3))
    z = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    return z + b[None, :, None, None], windows


def _conv_backward(windows: np.ndarray, w: np.ndarray, dz: np.ndarray,
                   input_shape: Tuple[int, ...]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    dw = np.tensordot(windows, dz, axes=([0, 2, 3], [0, 2, 3])).transpose(3, 0, 1, 2)
    db = dz.sum(axis=(0, 2, 3))
    dx = np.zeros(input_shape)
    out = dz.shape[2]
    for k in range(KERNEL):
        for l in range(KERNEL):
            dx[:, :, k:k + out, l:l + out] += np.tensordot(dz, w[:, :, k, l], axes=([1], [0])).transpose(0, 3, 1, 2)
    return dw, db, dx


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def forward_cached(params: NetworkParams, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    batch, single = _as_batch(x, params.input_side)
    z1, windows1 = _conv(batch, params.conv1_w, params.conv1_b)
    a1 = _relu(z1)
    z2, windows2 = _conv(a1, params.conv2_w, params.conv2_b)
    flat = _relu(z2).reshape(batch.shape[0], -1)
    z3 = flat @ params.fc1_w + params.fc1_b
    a3 = _relu(z3)
    z4 = a3 @ params.fc2_w + params.fc2_b
    q = _relu(z4) if params.relu_output else z4
    cache = ForwardCache(batch, windows1, z1, windows2, z2, flat, z3, a3, z4)
    return (q[0] if single else q), cache


def forward(params: NetworkParams, x: np.ndarray) -> np.ndarray:
    """
    Q-values for one input (side, side) or a batch (n, side, side)

    Returns:
        (|actions|,) for a single input, (n, |actions|) for a batch
    """
    return forward_cached(params, x)[0]


def backward(params: NetworkParams, x: np.ndarray, output_gradient: np.ndarray,
             cache: Optional[ForwardCache] = None) -> Gradients:
    """
    Parameter gradients of sum(output_gradient * Q(x))

    Rectifier subgradient is 0 at exactly 0.
    """
    if cache is None:
        _, cache = forward_cached(params, x)
    n = cache.x.shape[0]
    dq = np.asarray(output_gradient, dtype=float).reshape(n, params.action_count)

    dz4 = dq * (cache.z4 > 0) if params.relu_output else dq
    grads = {'fc2_w': cache.a3.T @ dz4, 'fc2_b': dz4.sum(axis=0)}
    dz3 = (dz4 @ params.fc2_w.T) * (cache.z3 > 0)
    grads['fc1_w'] = cache.flat.T @ dz3
    grads['fc1_b'] = dz3.sum(axis=0)
    dz2 = (dz3 @ params.fc1_w.T).reshape(cache.z2.shape) * (cache.z2 > 0)
    grads['conv2_w'], grads['conv2_b'], da1 = _conv_backward(
        cache.windows2, params.conv2_w, dz2, cache.z1.shape
    )
    dz1 = da1 * (cache.z1 > 0)
    grads['conv1_w'], grads['conv1_b'], _ = _conv_backward(
        cache.windows1, params.conv1_w, dz1, cache.x.shape
    )
    return grads


def sgd_step(params: NetworkParams, grads: Gradients, learning_rate: float) -> NetworkParams:
    """New parameters one gradient step downhill; the input is left untouched"""
    return replace(params, **{name: array - learning_rate * grads[name] for name, array in params.arrays()})


def min_abs_preactivation(params: NetworkParams, x: np.ndarray) -> float:
    """Distance of the nearest rectifier input from its kink"""
    _, cache = forward_cached(params, x)
    values = list(cache.preactivations())
    if not params.relu_output:
        values = values[:-1]
    return float(min(np.abs(v).min() for v in values))


def check_gradients(params: NetworkParams, x: np.ndarray, output_gradient: np.ndarray,
                    step: float = 1e-4) -> float:
    """
    Maximum relative error between backward() and central differences

    The probed scalar is sum(output_gradient * Q(x)); relative error is
    |g - n| / max(|g| + |n|, 1e-7).
    """
    dq = np.asarray(output_gradient, dtype=float)
    analytic = backward(params, x, dq)

    def objective(p: NetworkParams) -> float:
        return float(np.sum(dq * forward(p, x)))

    worst = 0.0
    for name, array in params.arrays():
        for index in np.ndindex(array.shape):
            original = array[index]
            plus, minus = array.copy(), array.copy()
            plus[index] = original + step
            minus[index] = original - step
            numeric = (objective(replace(params, **{name: plus}))
                       - objective(replace(params, **{name: minus}))) / (2 * step)
            g = analytic[name][index]
            worst = max(worst, abs(g - numeric) / max(abs(g) + abs(numeric), 1e-7))
    return worst


def input_side_for(length: int, override: Optional[int] = None) -> int:
    """Smallest square side holding `length` entries, or the override when it fits"""
    side = math.isqrt(length - 1) + 1 if length > 1 else 1
    if override is not None:
        if override * override < length:
            raise ShapeMismatchError(f"input side {override} cannot hold {length} entries")
        return override
    return side

