"""
Attention-based sentiment classifier with an explicit, ordered layer stack.

The parameters are partitioned into depth-indexed groups, bottom to top:

    embedding (token + positional + layer norm)  depth 0
    block_1 ... block_N (post-LN encoder blocks)  depth 1..N
    head (linear classifier over mean-pooled states)  depth N+1

so layer-wise learning rates can address every group by depth.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_ALIGNMENT,
    DEFAULT_EMBED_DIM,
    DEFAULT_FFN_DIM,
    DEFAULT_MAX_SEQ_LEN,
    DEFAULT_NUM_BLOCKS,
    DEFAULT_NUM_HEADS,
    HEAD_INIT_STD,
    NUM_CLASSES,
    PAD_ID,
)

from . import numerics as nx
from .errors import CheckpointError, ConfigError, ShapeError
from .numerics import Tensor

CHECKPOINT_FORMAT = 1


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = DEFAULT_EMBED_DIM
    num_blocks: int = DEFAULT_NUM_BLOCKS
    num_heads: int = DEFAULT_NUM_HEADS
    ffn_dim: int = DEFAULT_FFN_DIM
    max_seq_len: int = DEFAULT_MAX_SEQ_LEN
    num_classes: int = NUM_CLASSES
    alignment: float = DEFAULT_ALIGNMENT
    alignment_period: int = 0  # tokens per language; 0 when ids carry no translation structure

    def validate(self) -> None:
        for name in ("vocab_size", "embed_dim", "num_blocks", "num_heads", "ffn_dim", "max_seq_len"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"must be a positive integer, got {value!r}", key=f"model.{name}")
        if self.embed_dim % self.num_heads != 0:
            raise ConfigError(
                f"embed_dim {self.embed_dim} is not divisible by num_heads {self.num_heads}",
                key="model.num_heads",
            )
        if self.num_classes != NUM_CLASSES:
            raise ConfigError("only binary classification is supported", key="model.num_classes")
        if not 0.0 <= self.alignment <= 1.0:
            raise ConfigError(f"must be in [0, 1], got {self.alignment}", key="model.alignment")
        if self.alignment > 0.0 and self.alignment_period < 1:
            raise ConfigError("aligned embeddings need a vocabulary with translation-equivalent ids",
                              key="model.alignment")

    @property
    def head_dim(self) -> int:
        return self.embed_dim // self.num_heads


@dataclass
class LayerGroup:
    """Parameters of one layer of the stack (theta^l)."""
    name: str
    depth_index: int
    params: Dict[str, Tensor] = field(default_factory=dict)

    def tensors(self) -> List[Tensor]:
        return list(self.params.values())


@dataclass
class ModelParams:
    """A model version M_i: its config plus the ordered layer stack."""
    config: ModelConfig
    groups: List[LayerGroup]

    def named_parameters(self) -> List[Tuple[str, Tensor]]:
        return [(f"{g.name}.{key}", t) for g in self.groups for key, t in g.params.items()]

    def parameters(self) -> List[Tensor]:
        return [t for _, t in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(t.size for t in self.parameters())

    def group(self, name: str) -> LayerGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)


# =============================================================================
# CONSTRUCTION
# =============================================================================

def _token_table(rng: np.random.Generator, config: ModelConfig) -> Tensor:
    """
    Token embeddings, optionally aligned across languages.

    With alignment a > 0 every real token t mixes its own draw with a row
    shared by all ids congruent to t modulo alignment_period:
    sqrt(1 - a) * own[t] + sqrt(a) * shared[(t - 1) % period]. Translation
    equivalents in the synthetic vocabulary sit exactly one period apart, so
    they start out correlated with coefficient a. Padding keeps its own row.
    """
    d = config.embed_dim
    table = rng.normal(0.0, 1.0 / math.sqrt(d), size=(config.vocab_size, d))
    if config.alignment > 0.0:
        shared = rng.normal(0.0, 1.0 / math.sqrt(d), size=(config.alignment_period, d))
        rows = (np.arange(1, config.vocab_size) - 1) % config.alignment_period
        table[1:] = math.sqrt(1.0 - config.alignment) * table[1:] + math.sqrt(config.alignment) * shared[rows]
    return nx.parameter(table, "embedding.tokens")


def init_model(config: ModelConfig, seed: int) -> ModelParams:
    """Deterministic init: N(0, 1/fan_in) weights, unit gains, zero biases, a near-zero head."""
    config.validate()
    rng = np.random.default_rng(seed)
    d, dh, f = config.embed_dim, config.head_dim, config.ffn_dim

    def weight(shape, name):
        return nx.normal_parameter(rng, shape, 1.0 / math.sqrt(shape[0]), name)

    def gain(width, name):
        return nx.filled_parameter((1, width), 1.0, name)

    def bias(width, name):
        return nx.filled_parameter((1, width), 0.0, name)

    groups = []
    embedding = LayerGroup("embedding", 0)
    embedding.params["tokens"] = _token_table(rng, config)
    embedding.params["positions"] = nx.normal_parameter(rng, (config.max_seq_len, d), 1.0 / math.sqrt(d), "embedding.positions")
    embedding.params["ln_gain"] = gain(d, "embedding.ln_gain")
    embedding.params["ln_bias"] = bias(d, "embedding.ln_bias")
    groups.append(embedding)

    for b in range(1, config.num_blocks + 1):
        name = f"block_{b}"
        block = LayerGroup(name, b)
        for h in range(config.num_heads):
            block.params[f"q{h}"] = weight((d, dh), f"{name}.q{h}")
            block.params[f"k{h}"] = weight((d, dh), f"{name}.k{h}")
            block.params[f"v{h}"] = weight((d, dh), f"{name}.v{h}")
            block.params[f"o{h}"] = weight((dh, d), f"{name}.o{h}")
        block.params["attn_bias"] = bias(d, f"{name}.attn_bias")
        block.params["ln1_gain"] = gain(d, f"{name}.ln1_gain")
        block.params["ln1_bias"] = bias(d, f"{name}.ln1_bias")
        block.params["ffn_w1"] = weight((d, f), f"{name}.ffn_w1")
        block.params["ffn_b1"] = bias(f, f"{name}.ffn_b1")
        block.params["ffn_w2"] = weight((f, d), f"{name}.ffn_w2")
        block.params["ffn_b2"] = bias(d, f"{name}.ffn_b2")
        block.params["ln2_gain"] = gain(d, f"{name}.ln2_gain")
        block.params["ln2_bias"] = bias(d, f"{name}.ln2_bias")
        groups.append(block)

    head = LayerGroup("head", config.num_blocks + 1)
    head.params["w"] = nx.normal_parameter(rng, (d, config.num_classes), HEAD_INIT_STD, "head.w")
    head.params["b"] = bias(config.num_classes, "head.b")
    groups.append(head)
    return ModelParams(config, groups)


def layer_groups(model: ModelParams) -> List[LayerGroup]:
    """Ordered bottom-to-top partition of the trainable parameters."""
    return list(model.groups)


def is_no_decay(param_name: str) -> bool:
    """Gains and biases are excluded from weight decay."""
    leaf = param_name.rsplit(".", 1)[-1]
    return leaf == "b" or leaf.endswith("_gain") or leaf.endswith("_bias")


# =============================================================================
# FORWARD
# =============================================================================

def encode_tokens(tokens: Sequence[int], config: ModelConfig) -> Tuple[List[int], List[bool]]:
    """Truncate/pad to max_seq_len; returns ids and the real-position mask."""
    ids = [int(t) for t in tokens[: config.max_seq_len]]
    ids += [PAD_ID] * (config.max_seq_len - len(ids))
    valid = [t != PAD_ID for t in ids]
    if not any(valid):
        raise ShapeError("encode_tokens", [(len(tokens),)], "example has no real tokens")
    return ids, valid


def _block_forward(x: Tensor, block: LayerGroup, config: ModelConfig, mask: Tensor) -> Tensor:
    p = block.params
    inv_sqrt = 1.0 / math.sqrt(config.head_dim)
    attn = None
    # Output projection is split per head, equivalent to concat-then-project.
    for h in range(config.num_heads):
        q = nx.matmul(x, p[f"q{h}"])
        k = nx.matmul(x, p[f"k{h}"])
        v = nx.matmul(x, p[f"v{h}"])
        scores = nx.add(nx.scale(nx.matmul(q, nx.transpose(k)), inv_sqrt), mask)
        head_out = nx.matmul(nx.matmul(nx.row_softmax(scores), v), p[f"o{h}"])
        attn = head_out if attn is None else nx.add(attn, head_out)
    attn = nx.add(attn, p["attn_bias"])
    x = nx.layer_norm(nx.add(x, attn), p["ln1_gain"], p["ln1_bias"])

    hidden = nx.gelu(nx.add(nx.matmul(x, p["ffn_w1"]), p["ffn_b1"]))
    ffn = nx.add(nx.matmul(hidden, p["ffn_w2"]), p["ffn_b2"])
    return nx.layer_norm(nx.add(x, ffn), p["ln2_gain"], p["ln2_bias"])


def example_logits(model: ModelParams, tokens: Sequence[int]) -> Tensor:
    """1 x num_classes logits for one token sequence."""
    config = model.config
    ids, valid = encode_tokens(tokens, config)
    emb = model.groups[0].params
    x = nx.add(nx.embedding_gather(emb["tokens"], ids), emb["positions"])
    x = nx.layer_norm(x, emb["ln_gain"], emb["ln_bias"])

    mask = nx.key_mask_row(valid)
    for block in model.groups[1:-1]:
        x = _block_forward(x, block, config, mask)

    pooled = nx.matmul(nx.mean_pool_row(valid), x)
    head = model.groups[-1].params
    return nx.add(nx.matmul(pooled, head["w"]), head["b"])


def forward_loss(model: ModelParams, batch: Sequence) -> Tuple[Tensor, Tensor]:
    """Mean cross-entropy over the batch and the (batch, 2) logits."""
    if not batch:
        raise ShapeError("forward_loss", [(0,)], "empty batch")
    logits = nx.concat_rows([example_logits(model, ex.tokens) for ex in batch])
    loss = nx.cross_entropy(logits, [ex.label for ex in batch])
    return loss, logits


def predict(model: ModelParams, example) -> Tuple[int, Tuple[float, float]]:
    logits = example_logits(model, example.tokens)
    probs = nx.softmax_rows(logits)[0]
    return nx.argmax_rows(logits)[0], (probs[0], probs[1])


def predict_labels(model: ModelParams, examples: Sequence) -> List[int]:
    return [nx.argmax_rows(example_logits(model, ex.tokens))[0] for ex in examples]


# =============================================================================
# SNAPSHOTS AND CHECKPOINTS
# =============================================================================

def snapshot(model: ModelParams) -> Dict[str, Tensor]:
    return {name: nx.clone(t) for name, t in model.named_parameters()}


def restore(model: ModelParams, saved: Dict[str, Tensor]) -> None:
    for name, t in model.named_parameters():
        nx.copy_into(t, saved[name])


def clone_model(model: ModelParams) -> ModelParams:
    groups = [
        LayerGroup(g.name, g.depth_index, {k: nx.clone(t) for k, t in g.params.items()})
        for g in model.groups
    ]
    return ModelParams(model.config, groups)


def models_bit_equal(a: ModelParams, b: ModelParams) -> bool:
    pa, pb = a.named_parameters(), b.named_parameters()
    return len(pa) == len(pb) and all(
        na == nb and nx.bit_equal(ta, tb) for (na, ta), (nb, tb) in zip(pa, pb)
    )


def save_checkpoint(model: ModelParams, path: str, metadata: Optional[dict] = None) -> None:
    meta = {
        "format": CHECKPOINT_FORMAT,
        "config": asdict(model.config),
        "groups": [[g.name, g.depth_index, list(g.params)] for g in model.groups],
        "metadata": metadata or {},
    }
    nx.save_tensors(path, dict(model.named_parameters()), meta)


def load_checkpoint(path: str) -> Tuple[ModelParams, dict]:
    tensors, meta = nx.load_tensors(path)
    try:
        config = ModelConfig(**meta["config"])
        groups = []
        for name, depth, keys in meta["groups"]:
            groups.append(LayerGroup(name, depth, {k: tensors.pop(f"{name}.{k}") for k in keys}))
    except KeyError as e:
        raise CheckpointError(f"{path}: missing entry {e}") from e
    if tensors:
        raise CheckpointError(f"{path}: unexpected tensors {sorted(tensors)}")
    config.validate()
    return ModelParams(config, groups), meta.get("metadata", {})
