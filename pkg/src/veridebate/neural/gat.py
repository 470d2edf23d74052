"""Graph attention layer with exact analytic gradients.

Per node i the layer computes

    h_i' = act( sum_{j in N(i)} alpha_ij * W h_j )

where the attention weights alpha_i* are a softmax over i's neighbors
of leaky-ReLU(a . [W h_i ; W h_j]) with slope 0.2. Hidden layers use
ELU as ``act``; the last layer of a stack uses the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..graph import DebateGraph, neighbor_lists


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(x))


def elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


def leaky_relu_grad(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, 1.0, slope)


def softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - np.max(x)
    e = np.exp(shifted)
    return e / e.sum()


@dataclass
class GatLayer:
    weight: np.ndarray  # (out_dim, in_dim)
    attn: np.ndarray    # (2 * out_dim,)
    activation: str = "elu"  # "elu" | "identity"
    leaky_slope: float = 0.2

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=np.float64)
        self.attn = np.asarray(self.attn, dtype=np.float64)
        if self.attn.shape != (2 * self.weight.shape[0],):
            raise ValueError("attention vector must have length 2 * out_dim")
        if self.activation not in ("elu", "identity"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @classmethod
    def create(cls, in_dim: int, out_dim: int, rng: np.random.Generator,
               activation: str = "elu") -> "GatLayer":
        w_scale = 1.0 / math.sqrt(in_dim)
        a_scale = 1.0 / math.sqrt(2 * out_dim)
        return cls(
            weight=rng.uniform(-w_scale, w_scale, size=(out_dim, in_dim)),
            attn=rng.uniform(-a_scale, a_scale, size=2 * out_dim),
            activation=activation,
        )

    @property
    def in_dim(self) -> int:
        return int(self.weight.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weight.shape[0])

    def _apply_act(self, x: np.ndarray) -> np.ndarray:
        return elu(x) if self.activation == "elu" else x

    def _act_grad(self, x: np.ndarray) -> np.ndarray:
        return elu_grad(x) if self.activation == "elu" else np.ones_like(x)


@dataclass
class GatCache:
    features: np.ndarray
    projected: np.ndarray
    neighbor_ids: list[np.ndarray]
    alphas: list[np.ndarray]
    logits_pre: list[np.ndarray]
    aggregated: np.ndarray


def gat_forward_cached(layer: GatLayer, features: np.ndarray,
                       neighbor_ids: list[np.ndarray]) -> tuple[np.ndarray, GatCache]:
    features = np.asarray(features, dtype=np.float64)
    if features.shape[1] != layer.in_dim:
        raise ValueError(
            f"feature dim {features.shape[1]} does not match layer in_dim {layer.in_dim}"
        )
    n = features.shape[0]
    out_dim = layer.out_dim
    projected = features @ layer.weight.T  # (n, out_dim)
    a_src = layer.attn[:out_dim]
    a_dst = layer.attn[out_dim:]
    score_src = projected @ a_src  # contribution of the attending node
    score_dst = projected @ a_dst  # contribution of each neighbor

    aggregated = np.empty((n, out_dim))
    alphas: list[np.ndarray] = []
    logits_pre: list[np.ndarray] = []
    for i in range(n):
        nb = neighbor_ids[i]
        pre = score_src[i] + score_dst[nb]
        alpha = softmax(leaky_relu(pre, layer.leaky_slope))
        aggregated[i] = alpha @ projected[nb]
        alphas.append(alpha)
        logits_pre.append(pre)
    output = layer._apply_act(aggregated)
    cache = GatCache(features, projected, list(neighbor_ids), alphas, logits_pre, aggregated)
    return output, cache


def gat_backward(layer: GatLayer, cache: GatCache,
                 d_output: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of a scalar loss w.r.t. the layer inputs and parameters,
    given the gradient w.r.t. the layer output."""
    projected = cache.projected
    n, out_dim = projected.shape
    a_src = layer.attn[:out_dim]
    a_dst = layer.attn[out_dim:]

    d_agg = d_output * layer._act_grad(cache.aggregated)
    d_proj = np.zeros_like(projected)
    d_a_src = np.zeros(out_dim)
    d_a_dst = np.zeros(out_dim)
    for i in range(n):
        nb = cache.neighbor_ids[i]
        alpha = cache.alphas[i]
        pre = cache.logits_pre[i]
        dm = d_agg[i]

        d_alpha = projected[nb] @ dm
        d_proj[nb] += np.outer(alpha, dm)

        d_logit = alpha * (d_alpha - alpha @ d_alpha)
        d_pre = d_logit * leaky_relu_grad(pre, layer.leaky_slope)

        total = d_pre.sum()
        d_a_src += total * projected[i]
        d_proj[i] += total * a_src
        d_a_dst += d_pre @ projected[nb]
        d_proj[nb] += np.outer(d_pre, a_dst)

    d_weight = d_proj.T @ cache.features
    d_features = d_proj @ layer.weight
    return d_features, d_weight, np.concatenate([d_a_src, d_a_dst])


def gat_forward(layer: GatLayer, features: np.ndarray, graph: DebateGraph,
                return_attention: bool = False):
    """Apply one GAT layer over a debate graph.

    With ``return_attention`` the per-node attention rows come back too,
    aligned with sorted neighbor index arrays.
    """
    nbrs = neighbor_lists(graph.edges, graph.num_nodes)
    output, cache = gat_forward_cached(layer, features, nbrs)
    if return_attention:
        return output, list(zip(cache.neighbor_ids, cache.alphas))
    return output
