"""
Numerics - dense float64 tensors with a reverse-mode gradient tape.

This is the only module that touches raw numpy arrays. Everything above it
(model, optim, trainer) works with Tensor values and the functions below:

- Tensor: row-major float64 array plus bookkeeping for the tape
- GradTape: records executed primitives, replays them in reverse in grad()
- Primitive ops: matmul, add, scale, transpose, concat_rows, row_softmax,
  layer_norm, gelu, embedding_gather, cross_entropy, sum_all
- grad / finite_diff_grad / gradient_check_error: analytic and numeric gradients
- In-place update kernels used by the optimizers
- save_tensors / load_tensors: bit-exact .npz persistence

Ops only record when a tape is active on the current thread and at least
one input requires a gradient, so evaluation code simply runs without a tape.
"""

import json
import math
import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import erf

from .errors import CheckpointError, NumericOverflowError, ShapeError, TapeError

LAYER_NORM_EPS = 1e-5
MASKED_SCORE = -1e9
_SQRT_2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

_local = threading.local()


class Tensor:
    """Dense float64 tensor. `data` is always a private C-contiguous copy."""

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None):
        arr = np.array(data, dtype=np.float64, copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if any(extent <= 0 for extent in arr.shape):
            raise ShapeError("tensor", [arr.shape], "extents must be positive")
        self.data = np.ascontiguousarray(arr)
        self.requires_grad = requires_grad
        self.name = name
        self._tape: Optional["GradTape"] = None
        self._node_index: Optional[int] = None

    @classmethod
    def _wrap(cls, arr: np.ndarray, requires_grad: bool) -> "Tensor":
        t = cls.__new__(cls)
        t.data = np.ascontiguousarray(arr, dtype=np.float64)
        t.requires_grad = requires_grad
        t.name = None
        t._tape = None
        t._node_index = None
        return t

    @classmethod
    def _wrap_param(cls, arr: np.ndarray, name: str) -> "Tensor":
        t = cls._wrap(arr, True)
        t.name = name
        return t

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item", [self.shape], "tensor is not a scalar")
        return float(self.data.reshape(-1)[0])

    def tolist(self) -> list:
        return self.data.tolist()

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label})"


@dataclass
class _Node:
    op: str
    inputs: List[Tensor]
    output: Tensor
    backward: Callable[[np.ndarray], List[Optional[np.ndarray]]]


class GradTape:
    """
    Ordered record of executed primitives.

    Use as a context manager; ops executed inside the block are recorded on
    this tape. Tapes are thread-local, so distinct threads can each run their
    own tape without sharing state.
    """

    def __init__(self):
        self.nodes: List[_Node] = []

    def __enter__(self) -> "GradTape":
        stack = getattr(_local, "stack", None)
        if stack is None:
            stack = []
            _local.stack = stack
        stack.append(self)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        _local.stack.pop()

    def record(self, op: str, inputs: List[Tensor], output: Tensor, backward) -> None:
        output._tape = self
        output._node_index = len(self.nodes)
        self.nodes.append(_Node(op, inputs, output, backward))

    def gradient(self, loss: Tensor, params: Sequence[Tensor]) -> List[Tensor]:
        if loss._tape is not self or loss._node_index is None:
            raise TapeError("loss was not produced on this tape")
        if loss.size != 1:
            raise TapeError(f"loss must be a 1-element tensor, got shape {loss.shape}")

        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        # Reverse execution order; fan-out accumulates by plain summation.
        for node in reversed(self.nodes[: loss._node_index + 1]):
            g_out = grads.pop(id(node.output), None)
            if g_out is None:
                continue
            for inp, g_in in zip(node.inputs, node.backward(g_out)):
                if g_in is None or not inp.requires_grad:
                    continue
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + g_in
                else:
                    grads[key] = g_in

        result = []
        for p in params:
            g = grads.get(id(p))
            result.append(Tensor._wrap(np.zeros_like(p.data) if g is None else g.copy(), False))
        return result


def current_tape() -> Optional[GradTape]:
    stack = getattr(_local, "stack", None)
    return stack[-1] if stack else None


def _finish(op: str, out: np.ndarray, inputs: List[Tensor], backward) -> Tensor:
    if not np.all(np.isfinite(out)):
        raise NumericOverflowError(op)
    requires_grad = any(t.requires_grad for t in inputs)
    result = Tensor._wrap(out, requires_grad)
    tape = current_tape()
    if tape is not None and requires_grad:
        tape.record(op, inputs, result, backward)
    return result


def _require_2d(op: str, *tensors: Tensor) -> None:
    for t in tensors:
        if t.data.ndim != 2:
            raise ShapeError(op, [x.shape for x in tensors], "operands must be 2-D")


# =============================================================================
# PRIMITIVE OPS
# =============================================================================

def matmul(a: Tensor, b: Tensor) -> Tensor:
    _require_2d("matmul", a, b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", [a.shape, b.shape])
    a_data, b_data = a.data, b.data

    def backward(g):
        return [g @ b_data.T, a_data.T @ g]

    return _finish("matmul", a_data @ b_data, [a, b], backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; `b` may also be a single row added to every row of `a`."""
    _require_2d("add", a, b)
    if a.shape == b.shape:
        def backward(g):
            return [g, g]
    elif b.shape[0] == 1 and b.shape[1] == a.shape[1]:
        def backward(g):
            return [g, g.sum(axis=0, keepdims=True)]
    else:
        raise ShapeError("add", [a.shape, b.shape], "only equal shapes or bias-row broadcast")
    return _finish("add", a.data + b.data, [a, b], backward)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def backward(g):
        return [g * c]

    return _finish("scale", a.data * c, [a], backward)


def transpose(a: Tensor) -> Tensor:
    _require_2d("transpose", a)

    def backward(g):
        return [g.T]

    return _finish("transpose", a.data.T, [a], backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    if not parts:
        raise ShapeError("concat_rows", [], "nothing to concatenate")
    _require_2d("concat_rows", *parts)
    width = parts[0].shape[1]
    if any(p.shape[1] != width for p in parts):
        raise ShapeError("concat_rows", [p.shape for p in parts])
    bounds = np.cumsum([p.shape[0] for p in parts])[:-1]

    def backward(g):
        return list(np.split(g, bounds, axis=0))

    return _finish("concat_rows", np.vstack([p.data for p in parts]), list(parts), backward)


def row_softmax(a: Tensor) -> Tensor:
    _require_2d("row_softmax", a)
    shifted = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        return [s * (g - (g * s).sum(axis=1, keepdims=True))]

    return _finish("row_softmax", s, [a], backward)


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor) -> Tensor:
    _require_2d("layer_norm", a, gain, bias)
    width = a.shape[1]
    if gain.shape != (1, width) or bias.shape != (1, width):
        raise ShapeError("layer_norm", [a.shape, gain.shape, bias.shape])
    mu = a.data.mean(axis=1, keepdims=True)
    centered = a.data - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    xhat = centered * inv_std
    gain_data = gain.data

    def backward(g):
        dxhat = g * gain_data
        da = inv_std * (
            dxhat
            - dxhat.mean(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        )
        return [da, (g * xhat).sum(axis=0, keepdims=True), g.sum(axis=0, keepdims=True)]

    return _finish("layer_norm", xhat * gain_data + bias.data, [a, gain, bias], backward)


def gelu(a: Tensor) -> Tensor:
    x = a.data
    cdf = 0.5 * (1.0 + erf(x / _SQRT_2))

    def backward(g):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        return [g * (cdf + x * pdf)]

    return _finish("gelu", x * cdf, [a], backward)


def embedding_gather(table: Tensor, ids: Sequence[int]) -> Tensor:
    _require_2d("embedding_gather", table)
    idx = np.asarray(ids, dtype=np.int64).reshape(-1)
    if idx.size == 0:
        raise ShapeError("embedding_gather", [table.shape, (0,)], "no ids")
    rows = table.shape[0]
    bad = idx[(idx < 0) | (idx >= rows)]
    if bad.size:
        raise ShapeError("embedding_gather", [table.shape, idx.shape],
                         f"id {int(bad[0])} outside table of {rows} rows")

    def backward(g):
        g_table = np.zeros_like(table.data)
        np.add.at(g_table, idx, g)
        return [g_table]

    return _finish("embedding_gather", table.data[idx], [table], backward)


def cross_entropy(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean softmax cross-entropy over rows; returns a 1x1 tensor."""
    _require_2d("cross_entropy", logits)
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    n, classes = logits.shape
    if y.size != n:
        raise ShapeError("cross_entropy", [logits.shape, y.shape], "one label per row")
    if np.any((y < 0) | (y >= classes)):
        raise ShapeError("cross_entropy", [logits.shape, y.shape], f"labels must be in [0, {classes})")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(n)
    loss = -log_probs[rows, y].sum() / n

    def backward(g):
        d = np.exp(log_probs)
        d[rows, y] -= 1.0
        return [d * (g[0, 0] / n)]

    return _finish("cross_entropy", np.array([[loss]]), [logits], backward)


def sum_all(a: Tensor) -> Tensor:
    def backward(g):
        return [np.full_like(a.data, g[0, 0])]

    return _finish("sum_all", np.array([[a.data.sum()]]), [a], backward)


# =============================================================================
# GRADIENTS
# =============================================================================

def grad(loss: Tensor, params: Sequence[Tensor]) -> List[Tensor]:
    """Gradients of a taped scalar loss w.r.t. params (zeros where unreached)."""
    if loss._tape is None:
        raise TapeError("loss is not on a gradient tape")
    return loss._tape.gradient(loss, params)


def _scalar_value(value: Union[Tensor, float]) -> float:
    if isinstance(value, Tensor):
        return value.item()
    return float(value)


def finite_diff_grad(loss_fn: Callable[[], Union[Tensor, float]],
                     params: Sequence[Tensor], epsilon: float = 1e-5) -> List[Tensor]:
    """Central differences, perturbing one scalar parameter at a time in place."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    result = []
    for p in params:
        flat = p.data.reshape(-1)
        g = np.zeros(flat.size)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + epsilon
            up = _scalar_value(loss_fn())
            flat[i] = original - epsilon
            down = _scalar_value(loss_fn())
            flat[i] = original
            g[i] = (up - down) / (2.0 * epsilon)
        result.append(Tensor._wrap(g.reshape(p.data.shape), False))
    return result


def gradient_check_error(analytic: Sequence[Tensor], numeric: Sequence[Tensor]) -> float:
    """max |analytic - numeric| / max(1, |numeric|) over every scalar."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        if a.shape != n.shape:
            raise ShapeError("gradient_check_error", [a.shape, n.shape])
        rel = np.abs(a.data - n.data) / np.maximum(1.0, np.abs(n.data))
        worst = max(worst, float(rel.max()))
    return worst


# =============================================================================
# CONSTRUCTORS AND READ-ONLY HELPERS
# =============================================================================

def constant(values) -> Tensor:
    return Tensor(values, requires_grad=False)


def parameter(values, name: str) -> Tensor:
    return Tensor(values, requires_grad=True, name=name)


def normal_parameter(rng: np.random.Generator, shape: Tuple[int, int], std: float, name: str) -> Tensor:
    return Tensor._wrap_param(rng.normal(0.0, std, size=shape), name)


def filled_parameter(shape: Tuple[int, int], value: float, name: str) -> Tensor:
    return Tensor._wrap_param(np.full(shape, float(value)), name)


def key_mask_row(valid: Sequence[bool]) -> Tensor:
    """1 x L additive mask: 0 on real positions, MASKED_SCORE on padding."""
    return constant(np.where(np.asarray(valid, dtype=bool), 0.0, MASKED_SCORE).reshape(1, -1))


def mean_pool_row(valid: Sequence[bool]) -> Tensor:
    """1 x L averaging weights over the real positions."""
    mask = np.asarray(valid, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        raise ShapeError("mean_pool_row", [mask.shape], "no real positions")
    return constant((mask / count).reshape(1, -1))


def softmax_rows(t: Tensor) -> List[List[float]]:
    shifted = t.data - t.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return (e / e.sum(axis=1, keepdims=True)).tolist()


def argmax_rows(t: Tensor) -> List[int]:
    # np.argmax keeps the first maximum on ties
    return [int(i) for i in np.argmax(t.data, axis=1)]


def clone(t: Tensor) -> Tensor:
    c = Tensor._wrap(t.data.copy(), t.requires_grad)
    c.name = t.name
    return c


def copy_into(dst: Tensor, src: Tensor) -> None:
    if dst.shape != src.shape:
        raise ShapeError("copy_into", [dst.shape, src.shape])
    np.copyto(dst.data, src.data)


def zeros_like(t: Tensor) -> Tensor:
    return Tensor._wrap(np.zeros_like(t.data), False)


def bit_equal(a: Tensor, b: Tensor) -> bool:
    return a.shape == b.shape and a.data.tobytes() == b.data.tobytes()


# =============================================================================
# IN-PLACE UPDATE KERNELS
# =============================================================================

def sgd_update_(param: Tensor, g: Tensor, lr: float) -> None:
    """theta <- theta - lr * g"""
    if param.shape != g.shape:
        raise ShapeError("sgd_update", [param.shape, g.shape])
    param.data -= lr * g.data


def adamw_update_(param: Tensor, g: Tensor, m: Tensor, v: Tensor, step: int, lr: float,
                  beta1: float, beta2: float, eps: float, weight_decay: float) -> None:
    """Decoupled weight decay followed by the bias-corrected Adam step."""
    if not (param.shape == g.shape == m.shape == v.shape):
        raise ShapeError("adamw_update", [param.shape, g.shape, m.shape, v.shape])
    m.data *= beta1
    m.data += (1.0 - beta1) * g.data
    v.data *= beta2
    v.data += (1.0 - beta2) * (g.data * g.data)
    m_hat = m.data / (1.0 - beta1 ** step)
    v_hat = v.data / (1.0 - beta2 ** step)
    if weight_decay:
        param.data *= 1.0 - lr * weight_decay
    param.data -= lr * (m_hat / (np.sqrt(v_hat) + eps))
    if not np.all(np.isfinite(param.data)):
        raise NumericOverflowError("adamw_update")


# =============================================================================
# PERSISTENCE
# =============================================================================

_META_KEY = "__meta__"


def save_tensors(path: str, tensors: Dict[str, Tensor], meta: dict) -> None:
    """Write named tensors plus JSON metadata into one .npz file."""
    arrays = {name: t.data for name, t in tensors.items()}
    if _META_KEY in arrays:
        raise CheckpointError(f"tensor name {_META_KEY!r} is reserved")
    arrays[_META_KEY] = np.array(json.dumps(meta, sort_keys=True))
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_tensors(path: str) -> Tuple[Dict[str, Tensor], dict]:
    with np.load(path, allow_pickle=False) as archive:
        if _META_KEY not in archive.files:
            raise CheckpointError(f"{path}: missing metadata entry")
        meta = json.loads(str(archive[_META_KEY]))
        tensors = {
            name: Tensor._wrap_param(archive[name], name)
            for name in archive.files if name != _META_KEY
        }
    return tensors, meta
