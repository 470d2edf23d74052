"""Independent oracles the implementation is checked against.

Each function here recomputes a quantity from first principles by a
route the production code never takes: central finite differences for
gradients, raw confusion-count arithmetic for metrics, and edge-scan
neighbor recomputation for graphs.
"""

from __future__ import annotations

import numpy as np

from veridebate.neural import AnalysisModel, Sample, batch_loss


def finite_difference_gradient(model: AnalysisModel, batch: list[Sample],
                               step: float = 1e-4) -> np.ndarray:
    """Central finite differences of the mean batch loss over every
    parameter, treating the model's forward pass as a black box."""
    params = model.parameter_vector()
    grad = np.empty_like(params)
    for k in range(params.size):
        perturbed = params.copy()
        perturbed[k] += step
        model.set_parameter_vector(perturbed)
        up = batch_loss(model, batch)
        perturbed[k] -= 2 * step
        model.set_parameter_vector(perturbed)
        down = batch_loss(model, batch)
        grad[k] = (up - down) / (2 * step)
    model.set_parameter_vector(params)
    return grad


def block_relative_errors(model: AnalysisModel, analytic: np.ndarray,
                          numeric: np.ndarray) -> dict[str, float]:
    errors = {}
    for name, sl in model.block_slices():
        a, f = analytic[sl], numeric[sl]
        denom = max(np.abs(a).max(), np.abs(f).max(), 1e-8)
        errors[name] = float(np.abs(a - f).max() / denom)
    return errors


def brute_force_metrics(predictions, labels) -> dict[str, float]:
    """Recompute accuracy and per-class F1 from raw confusion counts."""
    predictions = list(predictions)
    labels = list(labels)
    out: dict[str, float] = {}
    f1s = []
    for cls, name in ((0, "real"), (1, "fake")):
        tp = fp = fn = 0
        for p, y in zip(predictions, labels):
            if p == cls and y == cls:
                tp += 1
            elif p == cls and y != cls:
                fp += 1
            elif p != cls and y == cls:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[f"f1_{name}"] = f1
        f1s.append(f1)
    out["macro_f1"] = sum(f1s) / 2
    out["accuracy"] = sum(1 for p, y in zip(predictions, labels) if p == y) / len(labels)
    return out


def brute_force_neighbors(edges, num_nodes: int) -> list[set[int]]:
    """In-neighbor sets rebuilt by scanning the edge list."""
    result = [set() for _ in range(num_nodes)]
    for src, dst in edges:
        result[dst].add(src)
    return result
