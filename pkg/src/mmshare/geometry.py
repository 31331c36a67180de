"""Poisson deployments, operator tagging and minimum-loss association."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .config import Scenario, SimulationConfig

MIN_DISTANCE_M = 1.0
UNASSOCIATED = -1


class NodeKind(enum.Enum):
    BS = "bs"
    UE = "ue"


@dataclass(frozen=True)
class Node:
    position: tuple[float, float]
    operator: int
    kind: NodeKind


@dataclass
class Deployment:
    """One drop's nodes. UE 0 is the typical (probe) user at the center.

    In Scenario 4 BS ``2i`` and ``2i + 1`` share site ``i`` (operators 0 and 1).
    """

    bs_xy: np.ndarray
    bs_op: np.ndarray
    ue_xy: np.ndarray
    ue_op: np.ndarray
    side_m: float
    sites_colocated: bool = False
    open_access: bool = False
    association: np.ndarray | None = None

    typical_ue = 0

    @property
    def bss(self) -> list[Node]:
        return [Node((float(x), float(y)), int(o), NodeKind.BS) for (x, y), o in zip(self.bs_xy, self.bs_op)]

    @property
    def ues(self) -> list[Node]:
        return [Node((float(x), float(y)), int(o), NodeKind.UE) for (x, y), o in zip(self.ue_xy, self.ue_op)]

    @property
    def n_bs(self) -> int:
        return len(self.bs_xy)

    def distances(self, ue_idx=slice(None), bs_idx=slice(None)) -> np.ndarray:
        """UE x BS distance matrix in meters, floored at ``MIN_DISTANCE_M``."""
        u, b = self.ue_xy[ue_idx], self.bs_xy[bs_idx]
        dx = u[:, 0, None] - b[None, :, 0]
        dy = u[:, 1, None] - b[None, :, 1]
        return np.maximum(np.sqrt(dx * dx + dy * dy), MIN_DISTANCE_M)

    def candidate_blocks(self):
        """(UE indices, BS indices) blocks covering every allowed association:
        one block per operator under closed access, a single block otherwise."""
        if self.open_access:
            return [(np.arange(len(self.ue_xy)), np.arange(self.n_bs))]
        return [(np.flatnonzero(self.ue_op == o), np.flatnonzero(self.bs_op == o))
                for o in np.unique(np.concatenate([self.ue_op, self.bs_op]))]

    def candidates(self) -> np.ndarray:
        """UE x BS mask of allowed associations."""
        if self.open_access:
            return np.ones((len(self.ue_xy), self.n_bs), dtype=bool)
        return self.ue_op[:, None] == self.bs_op[None, :]

    def to_csv(self, path) -> None:
        """Debug dump: ``kind,operator,x_m,y_m,assoc_bs``."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["kind", "operator", "x_m", "y_m", "assoc_bs"])
            for (x, y), o in zip(self.bs_xy, self.bs_op):
                w.writerow(["bs", int(o), repr(float(x)), repr(float(y)), ""])
            assoc = self.association if self.association is not None else [UNASSOCIATED] * len(self.ue_xy)
            for (x, y), o, a in zip(self.ue_xy, self.ue_op, assoc):
                w.writerow(["ue", int(o), repr(float(x)), repr(float(y)), "" if a == UNASSOCIATED else int(a)])


def sample_ppp(density: float, area: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP on the square ``[0, sqrt(area)]^2`` km, returned in meters as (n, 2)."""
    if density < 0 or not area > 0:
        raise ValueError("density must be >= 0 and area > 0")
    n = rng.poisson(density * area)
    side = np.sqrt(area) * 1000.0
    return rng.uniform(0.0, side, (n, 2))


def deploy(config: SimulationConfig, rng: np.random.Generator) -> Deployment:
    """Draw BSs and UEs for ``config.scenario``.

    Scenarios 1-3 draw an independent BS PPP and UE PPP per operator.
    Scenario 2 then pools them: the superposition of the two networks is a
    PPP of twice the density, with access open to every UE. Scenario 4 draws
    one site PPP and places an antenna of each operator at every site.
    """
    sc = config.scenario
    lam_bs, lam_ue, area = config.lambda_bs, config.lambda_ue, config.area_km2
    side = config.side_m
    m = config.num_operators

    if sc is Scenario.SpectrumInfra:
        sites = sample_ppp(lam_bs, area, rng)
        bs_xy = np.repeat(sites, m, axis=0)
        bs_op = np.tile(np.arange(m), len(sites))
    else:
        per_op = [sample_ppp(lam_bs, area, rng) for _ in range(m)]
        bs_xy = np.concatenate(per_op).reshape(-1, 2)
        bs_op = np.repeat(np.arange(m), [len(p) for p in per_op])

    ues = [sample_ppp(lam_ue, area, rng) for _ in range(m)]
    ue_xy = np.concatenate([[[side / 2, side / 2]], *ues]).reshape(-1, 2)
    ue_op = np.concatenate([[0], np.repeat(np.arange(m), [len(u) for u in ues])]).astype(int)

    return Deployment(bs_xy=bs_xy, bs_op=bs_op.astype(int), ue_xy=ue_xy, ue_op=ue_op, side_m=side,
                      sites_colocated=sc is Scenario.SpectrumInfra,
                      open_access=sc is Scenario.SpectrumAccess)


def associate(deployment: Deployment, loss_db: np.ndarray) -> np.ndarray:
    """Serving BS per UE: the candidate with minimum pathloss + shadowing.

    ``loss_db`` is UE x BS with +inf on outage links. Ties go to the lowest BS
    index. UEs without a finite-loss candidate get ``UNASSOCIATED``. The
    result is also stored on ``deployment.association``.
    """
    masked = np.where(deployment.candidates(), loss_db, np.inf)
    if masked.shape[1] == 0:
        best = np.full(masked.shape[0], UNASSOCIATED)
    else:
        best = np.argmin(masked, axis=1)
        ok = np.isfinite(masked[np.arange(len(best)), best])
        best = np.where(ok, best, UNASSOCIATED)
    deployment.association = best
    return best


def cell_loads(association: np.ndarray, n_bs: int) -> np.ndarray:
    a = np.asarray(association)
    return np.bincount(a[a != UNASSOCIATED], minlength=n_bs)


def cell_load(bs: int, association: np.ndarray) -> int:
    """Number of UEs served by ``bs``."""
    return int(np.count_nonzero(np.asarray(association) == bs))
