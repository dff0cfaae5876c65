"""
Optimizers with layer-wise learning rate decay (LLRD).

The top layer trains at the base rate and every layer below it at zeta times
the rate of the layer above:

    eta^top = base_lr,    eta^(k-1) = zeta * eta^k

Two update rules share the schedule: plain SGD
(theta^l <- theta^l - eta^l * grad) and AdamW with eta^l as the group rate.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

from config import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DEFAULT_WEIGHT_DECAY,
    OPTIMIZER_ADAMW,
    OPTIMIZER_PLAIN_SGD,
    OPTIMIZERS,
)

from . import numerics as nx
from .errors import ConfigError, ShapeError
from .model import ModelParams, is_no_decay
from .numerics import Tensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LlrdSchedule:
    base_lr: float
    zeta: float
    per_layer_lr: Tuple[float, ...]  # indexed by depth, bottom -> top

    def __len__(self) -> int:
        return len(self.per_layer_lr)

    def lr_for_depth(self, depth_index: int) -> float:
        return self.per_layer_lr[depth_index]


def build_llrd_schedule(base_lr: float, zeta: float, num_groups: int) -> LlrdSchedule:
    if not (0.0 < zeta <= 1.0):
        raise ConfigError(f"zeta must be in (0, 1], got {zeta}", key="train.zeta")
    if num_groups < 1:
        raise ConfigError(f"need at least one layer group, got {num_groups}")
    if base_lr < 0:
        raise ConfigError(f"learning rate must be non-negative, got {base_lr}", key="train.base_lr")

    rates = [0.0] * num_groups
    rates[-1] = float(base_lr)
    for k in range(num_groups - 1, 0, -1):
        rates[k - 1] = zeta * rates[k]
    logger.debug(f"LLRD schedule zeta={zeta}: bottom {rates[0]:.3e} -> top {rates[-1]:.3e}")
    return LlrdSchedule(float(base_lr), float(zeta), tuple(rates))


@dataclass
class OptimizerState:
    variant: str = OPTIMIZER_ADAMW
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    # param name -> (first moment, second moment); adamw only
    moments: Dict[str, Tuple[Tensor, Tensor]] = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.variant!r}", key="train.optimizer")


def step(model: ModelParams, grads: Sequence[Tensor], schedule: LlrdSchedule,
         state: OptimizerState) -> None:
    """Apply one update in place; grads follow model.named_parameters() order."""
    named = model.named_parameters()
    if len(schedule) != len(model.groups):
        raise ShapeError("optim.step", [(len(schedule),), (len(model.groups),)],
                         "schedule length must equal the number of layer groups")
    if len(grads) != len(named):
        raise ShapeError("optim.step", [(len(grads),), (len(named),)],
                         "one gradient per parameter")
    for (name, param), g in zip(named, grads):
        if param.shape != g.shape:
            raise ShapeError("optim.step", [param.shape, g.shape], f"gradient for {name}")

    state.step += 1
    grad_iter = iter(grads)
    for group in model.groups:
        lr = schedule.lr_for_depth(group.depth_index)
        for key, param in group.params.items():
            g = next(grad_iter)
            if state.variant == OPTIMIZER_PLAIN_SGD:
                nx.sgd_update_(param, g, lr)
                continue
            name = f"{group.name}.{key}"
            if name not in state.moments:
                state.moments[name] = (nx.zeros_like(param), nx.zeros_like(param))
            m, v = state.moments[name]
            decay = 0.0 if is_no_decay(name) else state.weight_decay
            nx.adamw_update_(param, g, m, v, state.step, lr,
                             state.beta1, state.beta2, state.eps, decay)
