"""Backhaul topologies, UE association and end-to-end outage.

Nodes sit on a line at ground distance ``position`` from the donor, all at the
same mast height. Backhaul hops are decode-and-forward: a route from the donor
to the serving node works only if every hop on it clears the receiving node's
SNR threshold. When several routes exist (the parallel direct FSO link of
mode 3) the serving node is reached if any route works.

The seven deployment modes:

====  =====================================  =================  ===========
mode  backhaul                               hops               serving
====  =====================================  =================  ===========
1     none                                   -                  donor
2     donor-N1-N2, FSO + sub-THz per hop     2 x L              nearest
3     donor-N1-N2 sub-THz, donor-N2 FSO      2 x L, 1 x 2L      nearest
4     donor-N2, FSO + sub-THz                1 x 2L             nearest
5     as mode 2                              2 x L              N1
6     as mode 3                              2 x L, 1 x 2L      N1
7     as mode 4                              1 x 2L             N2
====  =====================================  =================  ===========
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fading, hybrid
from .linkbudget import Technology
from .scenario import Geometry, Scenario

__all__ = [
    "Node",
    "Hop",
    "Topology",
    "E2eSample",
    "MODES",
    "build_mode",
    "node_threshold",
    "associate_ue",
    "e2e_outage",
    "e2e_sample",
]

FSO = Technology.FSO
SUBTHZ = Technology.SUBTHZ
HYBRID = frozenset({FSO, SUBTHZ})
MODES = tuple(range(1, 8))
_HYBRID_STRATEGIES = ("hard", "soft", "mrc")


@dataclass(frozen=True)
class Node:
    name: str
    position: float
    ues: int


@dataclass(frozen=True)
class Hop:
    src: int
    dst: int
    length: float
    links: frozenset
    strategy: str
    threshold: float  # linear SNR required at the receiving node


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    hops: tuple[Hop, ...]
    access_threshold: float
    fixed_serving: int | None = None
    mode: int | None = None
    access_technology: Technology = Technology.MMWAVE

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if n == 0:
            raise ValueError("a topology needs at least the donor node")
        for k, hop in enumerate(self.hops):
            if not (0 <= hop.src < n and 0 <= hop.dst < n) or hop.src == hop.dst:
                raise ValueError(f"hop {k} references a missing node")
            if not hop.links or not hop.links <= HYBRID:
                raise ValueError(f"hop {k} needs a non-empty subset of {{FSO, SubTHz}}")
            if len(hop.links) == 1 and hop.strategy != "single":
                raise ValueError(f"single-link hop {k} must use strategy 'single'")
            if len(hop.links) == 2 and hop.strategy not in _HYBRID_STRATEGIES:
                raise ValueError(f"hybrid hop {k} needs one of {_HYBRID_STRATEGIES}")
            if not hop.threshold > 0 or not hop.length > 0:
                raise ValueError(f"hop {k} needs positive length and threshold")
        if self.fixed_serving is not None and not 0 <= self.fixed_serving < n:
            raise ValueError("fixed serving node out of range")
        if not self.access_threshold > 0:
            raise ValueError("access threshold must be > 0")
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        state = [0] * len(self.nodes)

        def visit(u: int) -> None:
            state[u] = 1
            for hop in self.hops:
                if hop.src == u:
                    if state[hop.dst] == 1:
                        raise ValueError("backhaul topology contains a cycle")
                    if state[hop.dst] == 0:
                        visit(hop.dst)
            state[u] = 2

        for u in range(len(self.nodes)):
            if state[u] == 0:
                visit(u)

    def routes(self, node: int) -> list[tuple[int, ...]]:
        """Every donor-to-``node`` path, as tuples of hop indices."""
        if node == 0:
            return [()]
        found = []
        for k, hop in enumerate(self.hops):
            if hop.dst == node:
                found.extend(route + (k,) for route in self.routes(hop.src))
        return found

    def descendants(self, node: int) -> set[int]:
        out: set[int] = set()
        stack = [node]
        while stack:
            u = stack.pop()
            for hop in self.hops:
                if hop.src == u and hop.dst not in out:
                    out.add(hop.dst)
                    stack.append(hop.dst)
        return out

    def load(self, node: int) -> int:
        """UEs carried through ``node``: its own plus every downstream node's."""
        return self.nodes[node].ues + sum(self.nodes[d].ues for d in self.descendants(node))


def node_threshold(ues_served: int, rate_per_ue: float) -> float:
    """Linear SNR needed to carry ``ues_served * rate_per_ue`` bps/Hz."""
    if ues_served < 1 or not rate_per_ue > 0:
        raise ValueError("need ues_served >= 1 and rate_per_ue > 0")
    return 2.0 ** (ues_served * rate_per_ue) - 1.0


def build_mode(mode: int, geom: Geometry, scenario: Scenario) -> Topology:
    if mode not in MODES:
        raise ValueError(f"mode must be one of 1..7, got {mode!r}")
    ues = scenario.service.ues_per_node
    rate = scenario.service.rate_per_ue
    strategy = scenario.network.hybrid_strategy
    span = geom.hop_length
    donor = Node("donor", 0.0, ues)
    n1 = Node("node1", span, ues)
    n2 = Node("node2", 2 * span, ues)

    if mode == 1:
        nodes, links = (donor,), []
    elif mode in (2, 5):
        nodes = (donor, n1, n2)
        links = [(0, 1, span, HYBRID), (1, 2, span, HYBRID)]
    elif mode in (3, 6):
        nodes = (donor, n1, n2)
        links = [(0, 1, span, frozenset({SUBTHZ})), (1, 2, span, frozenset({SUBTHZ})),
                 (0, 2, 2 * span, frozenset({FSO}))]
    else:
        nodes = (donor, n2)
        links = [(0, 1, 2 * span, HYBRID)]

    fixed = {5: 1, 6: 1, 7: 1}.get(mode)
    draft = Topology(nodes, tuple(Hop(s, d, length, lk, strategy if len(lk) == 2 else "single", 1.0)
                                  for s, d, length, lk in links), 1.0)
    hops = tuple(Hop(h.src, h.dst, h.length, h.links, h.strategy,
                     node_threshold(draft.load(h.dst), rate)) for h in draft.hops)
    return Topology(nodes, hops, node_threshold(1, rate), fixed_serving=fixed, mode=mode)


def associate_ue(topology: Topology, ue_position: float, scenario: Scenario) -> int:
    """Serving node for a UE at ground distance ``ue_position`` from the donor.

    Handover modes pick the node with the best mean access SNR, i.e. the
    shortest slant path; ties go to the lower node index.
    """
    if not math.isfinite(ue_position) or ue_position < 0:
        raise ValueError("UE position must be finite and >= 0")
    if topology.fixed_serving is not None:
        return topology.fixed_serving
    geom = scenario.geometry
    slant = [geom.access_length(abs(ue_position - node.position)) for node in topology.nodes]
    return int(np.argmin(slant))


def _hop_effective(hop: Hop, slot: int, scenario: Scenario, draws: fading.DrawSet) -> np.ndarray:
    g_f = fading.fso_link_snr(scenario, hop.length, draws, slot) if FSO in hop.links else None
    g_t = fading.subthz_link_snr(scenario, hop.length, draws, slot) if SUBTHZ in hop.links else None
    if g_t is None:
        return g_f
    if g_f is None:
        return g_t
    if hop.strategy == "hard":
        return np.maximum(g_f, g_t)
    if hop.strategy == "mrc":
        return hybrid.mrc_combine(g_f, g_t)
    return hybrid.soft_trace_flat(g_f, g_t, scenario.switching)[1]


def _evaluate(topology: Topology, scenario: Scenario, ue_position: float,
              draws: fading.DrawSet):
    serving = associate_ue(topology, ue_position, scenario)
    routes = topology.routes(serving)
    hop_snr = {k: _hop_effective(topology.hops[k], k, scenario, draws)
               for k in sorted({k for r in routes for k in r})}
    reachable = np.zeros(draws.n, dtype=bool)
    for route in routes:
        ok = np.ones(draws.n, dtype=bool)
        for k in route:
            ok &= hop_snr[k] >= topology.hops[k].threshold
        reachable |= ok
    offset = abs(ue_position - topology.nodes[serving].position)
    access = fading.access_link_snr(scenario, scenario.geometry.access_length(offset), draws)
    outage = ~reachable | (access < topology.access_threshold)
    return serving, routes, hop_snr, access, outage


def e2e_outage(topology: Topology, scenario: Scenario, ue_position: float,
               draws: fading.DrawSet) -> np.ndarray:
    """Per-trial end-to-end outage flags for a batch of channel draws."""
    return _evaluate(topology, scenario, ue_position, draws)[4]


@dataclass(frozen=True)
class E2eSample:
    """One end-to-end realization.

    ``per_hop_snr`` is aligned with ``topology.hops``; hops that lie on no route
    to the serving node are ``nan``.
    """

    per_hop_snr: tuple[float, ...]
    per_hop_threshold: tuple[float, ...]
    routes: tuple[tuple[int, ...], ...]
    access_snr: float
    access_threshold: float
    serving_node: int
    outage: bool

    def recompute_outage(self) -> bool:
        if self.access_snr < self.access_threshold:
            return True
        return not any(all(self.per_hop_snr[k] >= self.per_hop_threshold[k] for k in route)
                       for route in self.routes)


def e2e_sample(topology: Topology, scenario: Scenario, rng: np.random.Generator,
               ue_position: float | None = None) -> E2eSample:
    """Draw one fresh realization of every hop on the serving path and the access link."""
    if ue_position is None:
        ue_position = scenario.geometry.ue_horizontal_distance
    draws = fading.DrawSet(int(rng.integers(2**63)), 0, 1)
    serving, routes, hop_snr, access, outage = _evaluate(topology, scenario, ue_position, draws)
    per_hop = tuple(float(hop_snr[k][0]) if k in hop_snr else math.nan
                    for k in range(len(topology.hops)))
    return E2eSample(
        per_hop_snr=per_hop,
        per_hop_threshold=tuple(h.threshold for h in topology.hops),
        routes=tuple(routes),
        access_snr=float(access[0]),
        access_threshold=topology.access_threshold,
        serving_node=serving,
        outage=bool(outage[0]),
    )
