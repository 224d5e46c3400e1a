"""Village clustering and UHF uplink topology.

Villages are grouped into Village Connectivity Centers (VCCs) by a greedy
population-weighted disk cover. Each VCC then connects to the gateway UBS,
either directly or through a chain of other VCCs acting as relays.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .scenario import Point, Scenario, Village

EXCLUSIVE_AP = "ExclusiveAP"
RELAY_POINT = "RelayPoint"
UBS_ID = "UBS"

# distances within this slack count as covered / in range
GEOM_TOL = 1e-9


class TopologyError(RuntimeError):
    """Structural problem in an uplink assignment (e.g. a cycle)."""


@dataclass(frozen=True)
class Cluster:
    position: Point
    served: tuple[str, ...]


@dataclass(frozen=True)
class VccSite:
    id: str
    position: Point
    served_villages: tuple[str, ...]
    role: str
    parent: str | None  # None means a direct uplink to the UBS
    hop_count: int
    uplink_km: float
    advisory: str | None = None

    @property
    def uplink(self) -> str:
        return UBS_ID if self.parent is None else self.parent


@dataclass(frozen=True)
class UplinkAssignment:
    parent: dict[str, str | None]
    hops: dict[str, int]
    distance_km: dict[str, float]
    unreachable: tuple[str, ...] = ()


@dataclass(frozen=True)
class DeploymentPlan:
    ubs_position: Point
    sites: tuple[VccSite, ...]
    uncovered_villages: tuple[str, ...]
    wifi_radius_used: float
    unreachable_sites: tuple[str, ...] = field(default=())

    @property
    def n_A(self) -> int:
        return sum(s.role == EXCLUSIVE_AP for s in self.sites)

    @property
    def n_R(self) -> int:
        return sum(s.role == RELAY_POINT for s in self.sites)

    def site(self, site_id: str) -> VccSite:
        for s in self.sites:
            if s.id == site_id:
                return s
        raise KeyError(site_id)

    def site_of(self, village_id: str) -> VccSite | None:
        for s in self.sites:
            if village_id in s.served_villages:
                return s
        return None

    def to_dict(self) -> dict:
        return {
            "ubs_position": list(self.ubs_position),
            "wifi_radius_used": self.wifi_radius_used,
            "n_A": self.n_A,
            "n_R": self.n_R,
            "sites": [
                {
                    "id": s.id,
                    "position": list(s.position),
                    "served_villages": list(s.served_villages),
                    "role": s.role,
                    "uplink": s.uplink,
                    "hop_count": s.hop_count,
                    "uplink_km": s.uplink_km,
                    **({"advisory": s.advisory} if s.advisory else {}),
                }
                for s in self.sites
            ],
            "uncovered_villages": list(self.uncovered_villages),
            "unreachable_sites": list(self.unreachable_sites),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def edge_list_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site_id", "parent_id", "distance_km", "role"])
        for s in self.sites:
            w.writerow([s.id, s.uplink, repr(s.uplink_km), s.role])
        return buf.getvalue()


def _dist(p: Point, q: Point) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def cluster_villages(villages: Sequence[Village], R: float) -> list[Cluster]:
    """Greedy disk cover of villages by disks of radius ``R``.

    Candidate centers are village positions and pairwise midpoints of still
    uncovered villages. Each round takes the candidate covering the most
    uncovered population (then most villages, then smallest covered id, then
    lexicographically smallest covered id tuple, then candidate order) and
    recenters it on the centroid of its villages when that keeps them covered.
    """
    if not R > 0:
        raise ValueError("wifi radius must be positive")
    remaining = list(villages)
    clusters: list[Cluster] = []
    while remaining:
        pts = np.array([v.position for v in remaining], dtype=float)
        pop = np.array([v.population for v in remaining], dtype=float)
        iu, ju = np.triu_indices(len(remaining), k=1)
        candidates = np.vstack([pts, (pts[iu] + pts[ju]) / 2])
        d = np.hypot(candidates[:, None, 0] - pts[None, :, 0], candidates[:, None, 1] - pts[None, :, 1])
        cover = d <= R + GEOM_TOL
        cover_pop = cover @ pop
        cover_cnt = cover.sum(axis=1)
        top = np.flatnonzero(cover_pop == cover_pop.max())
        top = top[cover_cnt[top] == cover_cnt[top].max()]

        best_key, best = None, None
        for k in top:  # ascending candidate order, so equal keys keep the first
            covered = [remaining[i] for i in np.flatnonzero(cover[k])]
            ids = tuple(sorted(v.id for v in covered))
            key = (ids[0], ids)
            if best_key is None or key < best_key:
                best_key, best = key, (tuple(candidates[k]), covered)

        center, covered = best
        cx = sum(v.position[0] for v in covered) / len(covered)
        cy = sum(v.position[1] for v in covered) / len(covered)
        if all(_dist((cx, cy), v.position) <= R + GEOM_TOL for v in covered):
            center = (cx, cy)
        clusters.append(Cluster((float(center[0]), float(center[1])), tuple(sorted(v.id for v in covered))))
        taken = {v.id for v in covered}
        remaining = [v for v in remaining if v.id not in taken]
    return clusters


def assign_uplinks(sites: dict[str, Point], ubs: Point, uhf_radius: float) -> UplinkAssignment:
    """Connect sites to the UBS in rounds of increasing hop count.

    Round one links every site within ``uhf_radius`` of the UBS directly. Each
    later round attaches every still-unconnected site to its nearest site
    connected in an earlier round (ties: fewer hops, then smaller id).
    """
    if not uhf_radius > 0:
        raise ValueError("uhf_radius must be positive")
    parent: dict[str, str | None] = {}
    hops: dict[str, int] = {}
    dist: dict[str, float] = {}
    for sid in sorted(sites):
        d = _dist(sites[sid], ubs)
        if d <= uhf_radius + GEOM_TOL:
            parent[sid], hops[sid], dist[sid] = None, 1, d

    pending = sorted(s for s in sites if s not in parent)
    while pending:
        connected = sorted(parent)
        attached = {}
        for sid in pending:
            best = None
            for cid in connected:
                d = _dist(sites[sid], sites[cid])
                if d <= uhf_radius + GEOM_TOL:
                    key = (d, hops[cid], cid)
                    if best is None or key < best:
                        best = key
            if best is not None:
                attached[sid] = best
        if not attached:
            break
        for sid, (d, h, cid) in attached.items():
            parent[sid], hops[sid], dist[sid] = cid, h + 1, d
        pending = [s for s in pending if s not in attached]
    return UplinkAssignment(parent, hops, dist, tuple(pending))


def classify_roles(parent: dict[str, str | None]) -> dict[str, str]:
    """RelayPoint for sites with at least one child, ExclusiveAP otherwise."""
    for start in parent:
        seen = {start}
        node = parent[start]
        while node is not None:
            if node in seen:
                raise TopologyError(f"uplink cycle through site {node!r}")
            if node not in parent:
                raise TopologyError(f"site {start!r} routes via unknown site {node!r}")
            seen.add(node)
            node = parent[node]
    has_child = {p for p in parent.values() if p is not None}
    return {sid: (RELAY_POINT if sid in has_child else EXCLUSIVE_AP) for sid in parent}


def _site_id(served: Sequence[str]) -> str:
    return "VCC-" + "+".join(served)


def _subtree(parent: dict[str, str | None], root: str) -> list[str]:
    out = []
    for sid in parent:
        node = parent[sid]
        while node is not None:
            if node == root:
                out.append(sid)
                break
            node = parent[node]
    return sorted(out)


def build_plan(scenario: Scenario, R: float) -> DeploymentPlan:
    lo, hi = scenario.radio.wifi_radius_bounds_km
    if not lo <= R <= hi:
        warnings.warn(f"wifi radius {R} km outside bounds [{lo}, {hi}]", stacklevel=2)
    clusters = cluster_villages(scenario.villages, R)
    positions = {_site_id(c.served): c.position for c in clusters}
    served = {_site_id(c.served): c.served for c in clusters}
    uhf = scenario.radio.uhf_radius_km
    links = assign_uplinks(positions, scenario.ubs_position, uhf)
    roles = classify_roles(links.parent)

    sites = []
    for sid in sorted(links.parent, key=lambda s: (links.hops[s], s)):
        advisory = None
        if roles[sid] == RELAY_POINT and scenario.mbs_sites:
            # a relay feeding sites that another MBS could host a UBS for
            for k, mbs in enumerate(scenario.mbs_sites):
                fed = _subtree(links.parent, sid)
                if fed and all(_dist(positions[f], mbs) <= uhf + GEOM_TOL for f in fed):
                    advisory = f"prefer UBS at mbs_sites[{k}]"
                    break
        sites.append(VccSite(
            id=sid, position=positions[sid], served_villages=served[sid], role=roles[sid],
            parent=links.parent[sid], hop_count=links.hops[sid], uplink_km=links.distance_km[sid],
            advisory=advisory,
        ))
    uncovered = tuple(sorted(v for sid in links.unreachable for v in served[sid]))
    return DeploymentPlan(
        ubs_position=scenario.ubs_position, sites=tuple(sites), uncovered_villages=uncovered,
        wifi_radius_used=R, unreachable_sites=links.unreachable,
    )


def min_relay_count(scenario: Scenario, R: float) -> int:
    """Relays forced by geography: the relay count of the greedy plan at ``R``."""
    return build_plan(scenario, R).n_R


def verify_plan_structure(plan: DeploymentPlan, villages: Sequence[Village], uhf_radius: float) -> list[str]:
    """Return a list of violated plan invariants (empty when the plan is sound)."""
    problems = []
    by_id = {v.id: v for v in villages}
    pos = {s.id: s.position for s in plan.sites}
    seen: list[str] = []
    for s in plan.sites:
        for vid in s.served_villages:
            if _dist(s.position, by_id[vid].position) > plan.wifi_radius_used + GEOM_TOL:
                problems.append(f"{vid} outside wifi radius of {s.id}")
        seen.extend(s.served_villages)
        anchor = plan.ubs_position if s.parent is None else pos.get(s.parent)
        if anchor is None:
            problems.append(f"{s.id} uplinks to missing site {s.parent}")
            continue
        if _dist(s.position, anchor) > uhf_radius + GEOM_TOL:
            problems.append(f"{s.id} uplink longer than uhf radius")
        expected = 1 if s.parent is None else plan.site(s.parent).hop_count + 1
        if s.hop_count != expected:
            problems.append(f"{s.id} hop count {s.hop_count} != {expected}")
    seen.extend(plan.uncovered_villages)
    if sorted(seen) != sorted(by_id):
        problems.append("villages not partitioned between sites and uncovered list")
    try:
        roles = classify_roles({s.id: s.parent for s in plan.sites})
    except TopologyError as exc:
        problems.append(str(exc))
    else:
        for s in plan.sites:
            if roles[s.id] != s.role:
                problems.append(f"{s.id} role {s.role} inconsistent with uplink tree")
    return problems
