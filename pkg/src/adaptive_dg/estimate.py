"""Residual estimator on the auxiliary CR solution and the two bulk markings."""
import csv
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from . import dg_core, postprocess


class Strategy(str, enum.Enum):
    CARSTENSEN_HOPPE = "ch"
    BECKER_MAO_SHI = "bms"


@dataclass(frozen=True, eq=False)
class EstimatorBreakdown:
    """Squared indicators: tangential-jump per edge (0 on boundary edges) and
    ``h_T^2 ||f||_T^2`` per triangle."""

    per_edge_jump: np.ndarray
    per_element_volume: np.ndarray

    @property
    def jump_total(self):
        return float(np.sum(self.per_edge_jump))

    @property
    def volume_total(self):
        return float(np.sum(self.per_element_volume))

    @property
    def eta_sq_total(self):
        return self.jump_total + self.volume_total

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "id", "indicator"])
            for i, v in enumerate(self.per_edge_jump):
                w.writerow(["edge", i, repr(float(v))])
            for i, v in enumerate(self.per_element_volume):
                w.writerow(["element", i, repr(float(v))])


@dataclass(frozen=True)
class MarkingConfig:
    strategy: Strategy = Strategy.CARSTENSEN_HOPPE
    theta_ch: float = 0.5
    theta_bms: float = 0.5
    sigma: float = 0.3
    gamma_switch: float = 1.0
    sigma_osc: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        for name in ("theta_ch", "theta_bms", "sigma", "sigma_osc"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")
        if not self.gamma_switch > 0.0:
            raise ValueError(f"gamma_switch must be positive, got {self.gamma_switch}")


@dataclass(frozen=True, eq=False)
class MarkResult:
    marked_edges: np.ndarray
    marked_triangles: np.ndarray
    branch: str | None = None


def estimate(u_star, f, mesh):
    """Indicators for a CR function ``u_star``.

    The tangential derivative of a P1 function is constant on each side of
    an edge, so ``int_e h_e [[du*/ds]]^2 ds = h_e^2 * (slope jump)^2``.
    """
    g = dg_core.element_gradients(dg_core.cr_to_dg(u_star, mesh), mesh)
    et = mesh.edge_triangles
    inner = et[:, 1] >= 0
    jump = np.zeros(mesh.n_edges)
    slope = np.einsum("ed,ed->e", g[et[inner, 0]] - g[et[inner, 1]], mesh.tangents[inner])
    jump[inner] = mesh.lengths[inner] ** 2 * slope ** 2
    return EstimatorBreakdown(jump, postprocess.data_oscillation(f, mesh))


def dorfler_select(indicators, fraction):
    """Minimal set of indices whose indicators sum to ``fraction`` of the total.

    Greedy in descending order, ties to the lower index. Only positive
    indicators are ever selected. All-zero input yields an empty selection
    and a ``RuntimeWarning``.
    """
    eta = np.asarray(indicators, dtype=float)
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    if np.any(eta < 0):
        raise ValueError("indicators must be nonnegative")
    total = float(np.sum(eta))
    if total == 0.0:
        warnings.warn("all indicators are zero; nothing marked", RuntimeWarning, stacklevel=2)
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((np.arange(len(eta)), -eta))
    order = order[eta[order] > 0]
    csum = np.cumsum(eta[order])
    k = int(np.searchsorted(csum, fraction * total, side="left"))
    return np.sort(order[:min(k + 1, len(order))])


def mark_ch(est, cfg):
    """Bulk marking on edge jumps, plus bulk marking on volume terms (``sigma_osc``)
    so that the data term shrinks under refinement."""
    edges = (dorfler_select(est.per_edge_jump, cfg.theta_ch) if est.jump_total > 0
             else np.zeros(0, dtype=np.int64))
    tris = (dorfler_select(est.per_element_volume, cfg.sigma_osc) if est.volume_total > 0
            else np.zeros(0, dtype=np.int64))
    return MarkResult(edges, tris)


def mark_bms(est, cfg):
    """Edge bulk marking when the data term is dominated by the jumps
    (``volume <= gamma_switch * jump``), otherwise volume bulk marking."""
    empty = np.zeros(0, dtype=np.int64)
    if est.volume_total <= cfg.gamma_switch * est.jump_total:
        edges = dorfler_select(est.per_edge_jump, cfg.theta_bms) if est.jump_total > 0 else empty
        return MarkResult(edges, empty, "jump")
    return MarkResult(empty, dorfler_select(est.per_element_volume, cfg.sigma), "volume")


def mark(est, cfg):
    if cfg.strategy is Strategy.CARSTENSEN_HOPPE:
        return mark_ch(est, cfg)
    return mark_bms(est, cfg)
