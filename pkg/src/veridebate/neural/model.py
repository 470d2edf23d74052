"""The full debate classifier and its exact gradients.

Forward path for one sample: trainable role vectors are projected and
concatenated onto the frozen turn embeddings, the stack of GAT layers
runs over the debate graph, the node matrix is mean-pooled, the
interactive attention block fuses it with the news embedding, and a
softmax head predicts (p_real, p_fake). ``backward`` differentiates the
mean batch cross-entropy w.r.t. every parameter block, role table
included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..domain import DebateLog
from ..encoding import ROLE_PAIR_INDEX, EmbeddingVector, RoleTable
from ..graph import edges_for_log, neighbor_lists
from .attention import InteractionHead, interact_backward, interact_cached
from .gat import GatLayer, gat_backward, gat_forward_cached, softmax

LOG_CLAMP = 1e-12


class NumericalFault(RuntimeError):
    """A non-finite value surfaced during training; names the parameter
    blocks involved."""


@dataclass
class ClassifierHead:
    weight: np.ndarray  # (2, 2 * d_p)
    bias: np.ndarray    # (2,)

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weight.shape[0] != 2 or self.bias.shape != (2,):
            raise ValueError("classifier head must map to exactly two classes")

    @classmethod
    def create(cls, in_dim: int, rng: np.random.Generator) -> "ClassifierHead":
        scale = 1.0 / math.sqrt(in_dim)
        return cls(weight=rng.uniform(-scale, scale, size=(2, in_dim)), bias=np.zeros(2))


def classify(fused: np.ndarray, head: ClassifierHead) -> np.ndarray:
    """Softmax over the two class logits; entries are positive and sum
    to 1 (up to float rounding)."""
    fused = np.asarray(fused, dtype=np.float64)
    if fused.shape[0] != head.weight.shape[1]:
        raise ValueError(
            f"fused vector width {fused.shape[0]} does not match head ({head.weight.shape[1]})"
        )
    return softmax(head.weight @ fused + head.bias)


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """Negative log-probability of the true class, clamped at 1e-12 so a
    fully saturated wrong prediction cannot produce -log 0."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    return float(-np.log(max(float(probs[label]), LOG_CLAMP)))


def global_mean_pool(features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValueError("global_mean_pool needs at least one node")
    return features.mean(axis=0)


@dataclass(frozen=True)
class ModelConfig:
    d_h: int = 384
    d_r: int = 16
    gat_hidden: int = 128
    gat_layers: int = 2
    d_p: int = 128
    heads: int = 4
    interaction_mode: str = "nodes"
    seed: int = 0

    def __post_init__(self):
        if self.gat_layers < 1:
            raise ValueError("need at least one GAT layer")
        if self.d_p % self.heads != 0:
            raise ValueError("d_p must be divisible by heads")
        if self.interaction_mode not in ("nodes", "pooled"):
            raise ValueError(f"unknown interaction mode {self.interaction_mode!r}")


@dataclass(frozen=True)
class Sample:
    """One classification instance: frozen per-turn embeddings, role ids
    into the role table (-1 means no role, e.g. a bare news node), the
    graph's neighbor lists, and the frozen news embedding."""

    news_id: str
    node_embeddings: np.ndarray          # (n, d_h)
    role_ids: np.ndarray                 # (n,), -1 for role-less nodes
    neighbor_ids: tuple[np.ndarray, ...]  # sorted in-neighbors per node
    news_embedding: np.ndarray           # (d_h,)
    label: int | None = None


def make_sample(log: DebateLog, turn_embeddings: list[EmbeddingVector],
                news_embedding: EmbeddingVector, label: int | None = None) -> Sample:
    if len(turn_embeddings) != len(log.turns):
        raise ValueError("one embedding per turn is required")
    role_ids = np.array(
        [ROLE_PAIR_INDEX[(t.role, t.stance)] for t in log.turns], dtype=np.intp
    )
    nbrs = tuple(neighbor_lists(edges_for_log(log), len(log.turns)))
    return Sample(
        news_id=log.news_id,
        node_embeddings=np.stack([e.values for e in turn_embeddings]),
        role_ids=role_ids,
        neighbor_ids=nbrs,
        news_embedding=news_embedding.values,
        label=label,
    )


def make_news_only_sample(news_id: str, news_embedding: EmbeddingVector,
                          label: int | None = None) -> Sample:
    """Degenerate one-node sample used when the debate is ablated away:
    the news embedding is the only node and carries no role."""
    return Sample(
        news_id=news_id,
        node_embeddings=news_embedding.values[None, :],
        role_ids=np.array([-1], dtype=np.intp),
        neighbor_ids=(np.array([0], dtype=np.intp),),
        news_embedding=news_embedding.values,
        label=label,
    )


class AnalysisModel:
    """All trainable parameters, plus flattening for the optimizer."""

    def __init__(self, config: ModelConfig, role_table: RoleTable,
                 gat_layers: list[GatLayer], interaction: InteractionHead,
                 classifier: ClassifierHead):
        self.config = config
        self.role_table = role_table
        self.gat_layers = gat_layers
        self.interaction = interaction
        self.classifier = classifier

    @classmethod
    def create(cls, config: ModelConfig) -> "AnalysisModel":
        rng = np.random.default_rng(config.seed)
        role_table = RoleTable.create(config.d_h, config.d_r, rng)
        node_dim = 2 * config.d_h
        dims = [node_dim] + [config.gat_hidden] * (config.gat_layers - 1) + [node_dim]
        layers = []
        for l in range(config.gat_layers):
            activation = "identity" if l == config.gat_layers - 1 else "elu"
            layers.append(GatLayer.create(dims[l], dims[l + 1], rng, activation))
        interaction = InteractionHead.create(node_dim, config.d_h, config.d_p,
                                             config.heads, rng)
        classifier = ClassifierHead.create(2 * config.d_p, rng)
        return cls(config, role_table, layers, interaction, classifier)

    # ---- parameter bookkeeping -------------------------------------------

    def param_blocks(self) -> list[tuple[str, np.ndarray]]:
        blocks = [
            ("role_embeddings", self.role_table.embeddings),
            ("role_projection", self.role_table.projection),
        ]
        for l, layer in enumerate(self.gat_layers):
            blocks.append((f"gat{l}.weight", layer.weight))
            blocks.append((f"gat{l}.attn", layer.attn))
        for name in ("graph_proj", "news_proj", "query", "key", "value", "out"):
            blocks.append((f"interaction.{name}", getattr(self.interaction, name)))
        blocks.append(("classifier.weight", self.classifier.weight))
        blocks.append(("classifier.bias", self.classifier.bias))
        return blocks

    @property
    def num_params(self) -> int:
        return sum(array.size for _, array in self.param_blocks())

    def parameter_vector(self) -> np.ndarray:
        return np.concatenate([array.ravel() for _, array in self.param_blocks()])

    def set_parameter_vector(self, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got {vector.shape}")
        offset = 0
        for _, array in self.param_blocks():
            chunk = vector[offset : offset + array.size]
            array[...] = chunk.reshape(array.shape)
            offset += array.size

    def block_slices(self) -> list[tuple[str, slice]]:
        slices = []
        offset = 0
        for name, array in self.param_blocks():
            slices.append((name, slice(offset, offset + array.size)))
            offset += array.size
        return slices

    # ---- forward / backward ----------------------------------------------

    def _node_matrix(self, sample: Sample) -> np.ndarray:
        n = sample.node_embeddings.shape[0]
        d_h = self.config.d_h
        if sample.node_embeddings.shape[1] != d_h:
            raise ValueError(
                f"sample embeddings have dim {sample.node_embeddings.shape[1]}, "
                f"model expects {d_h}"
            )
        tail = np.zeros((n, d_h))
        mask = sample.role_ids >= 0
        if np.any(mask):
            role_vecs = self.role_table.embeddings[sample.role_ids[mask]]
            tail[mask] = role_vecs @ self.role_table.projection.T
        return np.concatenate([sample.node_embeddings, tail], axis=1)

    def forward(self, sample: Sample):
        """Run the full forward pass; returns (probs, cache)."""
        nodes = self._node_matrix(sample)
        activations = nodes
        gat_caches = []
        for layer in self.gat_layers:
            activations, cache = gat_forward_cached(layer, activations,
                                                    list(sample.neighbor_ids))
            gat_caches.append(cache)
        pooled = global_mean_pool(activations)
        fused, att_cache = interact_cached(
            sample.news_embedding, activations, pooled, self.interaction,
            self.config.interaction_mode,
        )
        probs = classify(fused, self.classifier)
        return probs, {
            "gat": gat_caches,
            "attention": att_cache,
            "final_nodes": activations,
            "fused": fused,
            "probs": probs,
            "sample": sample,
        }

    def predict_proba(self, sample: Sample) -> np.ndarray:
        probs, _ = self.forward(sample)
        return probs

    def _backward_sample(self, cache: dict, label: int) -> dict[str, np.ndarray]:
        sample: Sample = cache["sample"]
        probs = cache["probs"]
        d_logits = probs.copy()
        d_logits[label] -= 1.0

        grads: dict[str, np.ndarray] = {}
        grads["classifier.weight"] = np.outer(d_logits, cache["fused"])
        grads["classifier.bias"] = d_logits
        d_fused = self.classifier.weight.T @ d_logits

        d_nodes_att, d_pooled, att_grads = interact_backward(
            self.interaction, cache["attention"], d_fused
        )
        for name, grad in att_grads.items():
            grads[f"interaction.{name}"] = grad

        n = cache["final_nodes"].shape[0]
        d_activations = np.tile(d_pooled / n, (n, 1))
        if d_nodes_att is not None:
            d_activations = d_activations + d_nodes_att

        for l in range(len(self.gat_layers) - 1, -1, -1):
            d_activations, d_weight, d_attn = gat_backward(
                self.gat_layers[l], cache["gat"][l], d_activations
            )
            grads[f"gat{l}.weight"] = d_weight
            grads[f"gat{l}.attn"] = d_attn

        d_h = self.config.d_h
        d_tail = d_activations[:, d_h:]
        d_role_emb = np.zeros_like(self.role_table.embeddings)
        d_role_proj = np.zeros_like(self.role_table.projection)
        mask = sample.role_ids >= 0
        if np.any(mask):
            ids = sample.role_ids[mask]
            d_tail_used = d_tail[mask]
            role_vecs = self.role_table.embeddings[ids]
            d_role_proj = d_tail_used.T @ role_vecs
            np.add.at(d_role_emb, ids, d_tail_used @ self.role_table.projection)
        grads["role_embeddings"] = d_role_emb
        grads["role_projection"] = d_role_proj
        return grads


def batch_loss(model: AnalysisModel, batch: list[Sample]) -> float:
    """Mean cross-entropy over the batch."""
    if not batch:
        raise ValueError("batch must be non-empty")
    total = 0.0
    for sample in batch:
        if sample.label is None:
            raise ValueError(f"sample {sample.news_id!r} has no label")
        probs, _ = model.forward(sample)
        total += cross_entropy(probs, sample.label)
    return total / len(batch)


def backward(model: AnalysisModel, batch: list[Sample]) -> np.ndarray:
    """Gradient of the mean batch loss as one flat vector aligned with
    ``parameter_vector``."""
    loss, grad = loss_and_grad(model, batch)
    return grad


def loss_and_grad(model: AnalysisModel, batch: list[Sample]) -> tuple[float, np.ndarray]:
    if not batch:
        raise ValueError("batch must be non-empty")
    accum: dict[str, np.ndarray] = {
        name: np.zeros_like(array) for name, array in model.param_blocks()
    }
    total = 0.0
    for sample in batch:
        if sample.label is None:
            raise ValueError(f"sample {sample.news_id!r} has no label")
        probs, cache = model.forward(sample)
        total += cross_entropy(probs, sample.label)
        for name, grad in model._backward_sample(cache, sample.label).items():
            accum[name] += grad
    scale = 1.0 / len(batch)
    bad = [name for name, grad in accum.items() if not np.all(np.isfinite(grad))]
    if bad:
        raise NumericalFault(f"non-finite gradient in parameter blocks: {bad}")
    flat = np.concatenate([(accum[name] * scale).ravel() for name, _ in model.param_blocks()])
    return total / len(batch), flat
