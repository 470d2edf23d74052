"""Debate-news interactive attention.

The pooled debate vector and the news embedding are projected to a
shared width d_p; the projected news embedding then queries the debate
through multi-head scaled dot-product attention. Two key/value sources
are supported:

* ``pooled`` - attend over the single pooled debate vector. Softmax
  over one key is identically 1, so the context is constant in the
  query; the mode exists because that literal reading is worth keeping
  testable.
* ``nodes`` (default) - attend over the per-node projected features,
  which lets the news weight individual turns.

The fused output is [g_proj ; context], width 2 * d_p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gat import softmax

INTERACTION_MODES = ("pooled", "nodes")


@dataclass
class InteractionHead:
    graph_proj: np.ndarray  # W_g: (d_p, node_dim)
    news_proj: np.ndarray   # W_e: (d_p, news_dim)
    query: np.ndarray       # (d_p, d_p)
    key: np.ndarray         # (d_p, d_p)
    value: np.ndarray       # (d_p, d_p)
    out: np.ndarray         # (d_p, d_p)
    heads: int

    def __post_init__(self):
        for name in ("graph_proj", "news_proj", "query", "key", "value", "out"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        d_p = self.graph_proj.shape[0]
        for name in ("query", "key", "value", "out"):
            if getattr(self, name).shape != (d_p, d_p):
                raise ValueError(f"{name} projection must be ({d_p}, {d_p})")
        if self.news_proj.shape[0] != d_p:
            raise ValueError("news projection rows must equal d_p")
        if d_p % self.heads != 0:
            raise ValueError(f"d_p={d_p} must be divisible by heads={self.heads}")

    @classmethod
    def create(cls, node_dim: int, news_dim: int, d_p: int, heads: int,
               rng: np.random.Generator) -> "InteractionHead":
        def uniform(rows: int, cols: int) -> np.ndarray:
            scale = 1.0 / math.sqrt(cols)
            return rng.uniform(-scale, scale, size=(rows, cols))

        return cls(
            graph_proj=uniform(d_p, node_dim),
            news_proj=uniform(d_p, news_dim),
            query=uniform(d_p, d_p),
            key=uniform(d_p, d_p),
            value=uniform(d_p, d_p),
            out=uniform(d_p, d_p),
            heads=heads,
        )

    @property
    def d_p(self) -> int:
        return int(self.graph_proj.shape[0])

    @property
    def head_dim(self) -> int:
        return self.d_p // self.heads


@dataclass
class InteractCache:
    mode: str
    news_emb: np.ndarray
    pooled: np.ndarray
    node_feats: np.ndarray | None
    kv: np.ndarray
    e_proj: np.ndarray
    q_full: np.ndarray
    keys: np.ndarray    # (m, heads, head_dim)
    values: np.ndarray  # (m, heads, head_dim)
    weights: np.ndarray  # (heads, m)
    concat: np.ndarray   # (d_p,)


def interact_cached(news_emb: np.ndarray, node_feats: np.ndarray, pooled: np.ndarray,
                    head: InteractionHead, mode: str = "nodes"):
    if mode not in INTERACTION_MODES:
        raise ValueError(f"mode must be one of {INTERACTION_MODES}, got {mode!r}")
    news_emb = np.asarray(news_emb, dtype=np.float64)
    pooled = np.asarray(pooled, dtype=np.float64)
    node_feats = np.asarray(node_feats, dtype=np.float64)
    if pooled.shape[0] != head.graph_proj.shape[1]:
        raise ValueError("pooled vector width does not match graph projection")
    if news_emb.shape[0] != head.news_proj.shape[1]:
        raise ValueError("news embedding width does not match news projection")

    d_p, n_heads, head_dim = head.d_p, head.heads, head.head_dim
    g_proj = head.graph_proj @ pooled
    e_proj = head.news_proj @ news_emb

    if mode == "pooled":
        kv = g_proj[None, :]
    else:
        if node_feats.shape[1] != head.graph_proj.shape[1]:
            raise ValueError("node feature width does not match graph projection")
        kv = node_feats @ head.graph_proj.T
    m = kv.shape[0]

    q_full = head.query @ e_proj
    keys = (kv @ head.key.T).reshape(m, n_heads, head_dim)
    values = (kv @ head.value.T).reshape(m, n_heads, head_dim)
    q_heads = q_full.reshape(n_heads, head_dim)

    scale = 1.0 / math.sqrt(head_dim)
    weights = np.empty((n_heads, m))
    per_head = np.empty((n_heads, head_dim))
    for h in range(n_heads):
        scores = (keys[:, h, :] @ q_heads[h]) * scale
        w = softmax(scores)
        weights[h] = w
        per_head[h] = w @ values[:, h, :]
    concat = per_head.reshape(d_p)
    context = head.out @ concat
    fused = np.concatenate([g_proj, context])
    cache = InteractCache(
        mode=mode,
        news_emb=news_emb,
        pooled=pooled,
        node_feats=node_feats if mode == "nodes" else None,
        kv=kv,
        e_proj=e_proj,
        q_full=q_full,
        keys=keys,
        values=values,
        weights=weights,
        concat=concat,
    )
    return fused, cache


def interact(news_emb, node_feats, pooled, head: InteractionHead, mode: str = "nodes",
             return_weights: bool = False):
    """Fuse a debate graph with its news embedding; returns the 2*d_p
    vector [g_proj ; context], plus the (heads, keys) attention weight
    matrix when asked."""
    fused, cache = interact_cached(news_emb, node_feats, pooled, head, mode)
    if return_weights:
        return fused, cache.weights
    return fused


def interact_backward(head: InteractionHead, cache: InteractCache, d_fused: np.ndarray):
    """Backward pass of interact_cached.

    Returns (d_node_feats, d_pooled, grads) where grads maps the
    projection names to their gradient arrays; d_node_feats is None in
    pooled mode (node features are not consumed there).
    """
    d_p, n_heads, head_dim = head.d_p, head.heads, head.head_dim
    m = cache.kv.shape[0]
    scale = 1.0 / math.sqrt(head_dim)

    d_g_proj = d_fused[:d_p].copy()
    d_context = d_fused[d_p:]

    d_out = np.outer(d_context, cache.concat)
    d_concat = head.out.T @ d_context
    d_per_head = d_concat.reshape(n_heads, head_dim)

    q_heads = cache.q_full.reshape(n_heads, head_dim)
    d_q_heads = np.empty_like(q_heads)
    d_keys = np.zeros_like(cache.keys)
    d_values = np.zeros_like(cache.values)
    for h in range(n_heads):
        w = cache.weights[h]
        d_values[:, h, :] += np.outer(w, d_per_head[h])
        d_w = cache.values[:, h, :] @ d_per_head[h]
        d_scores = w * (d_w - w @ d_w)
        d_q_heads[h] = (cache.keys[:, h, :].T @ d_scores) * scale
        d_keys[:, h, :] += np.outer(d_scores, q_heads[h]) * scale

    d_q_full = d_q_heads.reshape(d_p)
    d_query = np.outer(d_q_full, cache.e_proj)
    d_e_proj = head.query.T @ d_q_full
    d_news_proj = np.outer(d_e_proj, cache.news_emb)

    d_key_flat = d_keys.reshape(m, d_p)
    d_value_flat = d_values.reshape(m, d_p)
    d_key_w = d_key_flat.T @ cache.kv
    d_value_w = d_value_flat.T @ cache.kv
    d_kv = d_key_flat @ head.key + d_value_flat @ head.value

    if cache.mode == "pooled":
        d_g_proj += d_kv[0]
        d_graph_proj = np.outer(d_g_proj, cache.pooled)
        d_node_feats = None
    else:
        d_graph_proj = np.outer(d_g_proj, cache.pooled) + d_kv.T @ cache.node_feats
        d_node_feats = d_kv @ head.graph_proj
    d_pooled = head.graph_proj.T @ d_g_proj

    grads = {
        "graph_proj": d_graph_proj,
        "news_proj": d_news_proj,
        "query": d_query,
        "key": d_key_w,
        "value": d_value_w,
        "out": d_out,
    }
    return d_node_feats, d_pooled, grads
