"""Reduce a generalised Braess network to the canonical four-node configuration.

Each canonical link may be replaced by a directed path of any length, and any
link may carry a fixed external flow.  External flow is folded into the
free-flow time first, then every role path collapses to a single link whose
parameters are the sums along the path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from braess.core import FourNodeConfig
from braess.errors import BrokenPath, InvalidConfig, TopologyError

ROLES = ("AB", "BD", "BC", "AC", "CD")
# role -> canonical link index (0-based) in FourNodeConfig
ROLE_INDEX = {"AB": 0, "BD": 1, "BC": 2, "AC": 3, "CD": 4}


@dataclass(frozen=True)
class Link:
    src: Hashable
    dst: Hashable
    alpha: float
    beta: float
    role: str
    external_flow: float = 0.0

    def __post_init__(self) -> None:
        if self.role not in ROLE_INDEX:
            raise TopologyError(f"unknown role {self.role!r}", role=str(self.role))
        for name in ("alpha", "beta", "external_flow"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                raise InvalidConfig(f"link {self.src}->{self.dst}: {name} must be finite and >= 0")


@dataclass(frozen=True)
class GeneralNetwork:
    links: tuple[Link, ...]
    origin: Hashable
    destination: Hashable
    nodes: frozenset = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(self.links))
        nodes = frozenset(self.nodes)
        if not nodes:
            nodes = frozenset({self.origin, self.destination}).union(
                *({l.src, l.dst} for l in self.links)
            )
        object.__setattr__(self, "nodes", nodes)

    def role_links(self, role: str) -> list[Link]:
        return [l for l in self.links if l.role == role]


def absorb_external_flow(alpha: float, beta: float, external_flow: float) -> float:
    """Free-flow time seen by internal traffic once the fixed external flow is counted."""
    return alpha + beta * external_flow


def order_path(links: Sequence[Link], role: str = "?") -> list[Link]:
    """Return ``links`` ordered head-to-tail; raise BrokenPath unless they form one simple path."""
    if not links:
        raise BrokenPath(f"role {role}: no links", role=role)
    by_src: dict = {}
    dsts = set()
    for l in links:
        if l.src in by_src:
            raise BrokenPath(f"role {role}: node {l.src!r} has two outgoing links", role=role)
        if l.src == l.dst:
            raise BrokenPath(f"role {role}: self-loop at {l.src!r}", role=role)
        by_src[l.src] = l
        dsts.add(l.dst)
    starts = [s for s in by_src if s not in dsts]
    if len(starts) != 1:
        raise BrokenPath(f"role {role}: links do not chain head-to-tail", role=role)
    ordered = []
    seen = {starts[0]}
    node = starts[0]
    while node in by_src:
        l = by_src[node]
        if l.dst in seen:
            raise BrokenPath(f"role {role}: path revisits node {l.dst!r}", role=role)
        seen.add(l.dst)
        ordered.append(l)
        node = l.dst
    if len(ordered) != len(links):
        raise BrokenPath(f"role {role}: links do not form a single path", role=role)
    return ordered


def contract_path(links: Sequence[Link], role: str = "?") -> tuple[float, float]:
    """Collapse a role path to ``(alpha_P, beta_P)``, absorbing external flow per link."""
    ordered = order_path(links, role)
    alpha_p = sum(absorb_external_flow(l.alpha, l.beta, l.external_flow) for l in ordered)
    beta_p = sum(l.beta for l in ordered)
    return alpha_p, beta_p


def _endpoints(links: Sequence[Link], role: str) -> tuple[Hashable, Hashable, list]:
    ordered = order_path(links, role)
    interior = [l.dst for l in ordered[:-1]]
    return ordered[0].src, ordered[-1].dst, interior


def reduce_network(net: GeneralNetwork, *, relaxed: bool = False) -> tuple[FourNodeConfig, bool]:
    """Reduce ``net`` to ``(FourNodeConfig, has_bc)``.

    Role BC is optional; when absent the returned config has no link 3.
    """
    for l in net.links:
        for node in (l.src, l.dst):
            if node not in net.nodes:
                raise TopologyError(f"role {l.role}: node {node!r} not declared", role=l.role)

    a, d = net.origin, net.destination
    if a == d:
        raise TopologyError("origin and destination coincide")

    ends: dict[str, tuple] = {}
    for role in ROLES:
        links = net.role_links(role)
        if not links:
            if role == "BC":
                continue
            raise TopologyError(f"role {role} is missing", role=role)
        ends[role] = _endpoints(links, role)

    b = ends["AB"][1]
    c = ends["AC"][1]
    expected = {"AB": (a, b), "BD": (b, d), "AC": (a, c), "CD": (c, d), "BC": (b, c)}
    if ends["AB"][0] != a:
        raise TopologyError(f"role AB must start at origin {a!r}", role="AB")
    if ends["AC"][0] != a:
        raise TopologyError(f"role AC must start at origin {a!r}", role="AC")
    if len({a, b, c, d}) != 4:
        raise TopologyError("nodes a, b, c, d implied by the roles are not distinct", role="AB")
    for role, (src, dst, _) in ends.items():
        if (src, dst) != expected[role]:
            raise TopologyError(
                f"role {role} runs {src!r}->{dst!r}, expected {expected[role][0]!r}->{expected[role][1]!r}",
                role=role,
            )

    owner: dict = {}
    for role, (_, _, interior) in ends.items():
        for node in interior:
            if node in (a, b, c, d) or node in owner:
                raise TopologyError(
                    f"role {role}: interior node {node!r} is shared with another path", role=role
                )
            owner[node] = role

    alpha: list[Optional[float]] = [None] * 5
    beta: list[Optional[float]] = [None] * 5
    for role in ends:
        ap, bp = contract_path(net.role_links(role), role)
        alpha[ROLE_INDEX[role]] = ap
        beta[ROLE_INDEX[role]] = bp
    cfg = FourNodeConfig(tuple(alpha), tuple(beta), relaxed=relaxed)
    return cfg, cfg.has_bc


def network_from_links(
    links: Iterable[dict], origin: Hashable, destination: Hashable, nodes: Iterable = ()
) -> GeneralNetwork:
    """Build a GeneralNetwork from dicts with keys from/to/alpha/beta/role[/external_flow]."""
    built = []
    for i, raw in enumerate(links):
        try:
            built.append(
                Link(
                    src=raw["from"],
                    dst=raw["to"],
                    alpha=raw["alpha"],
                    beta=raw["beta"],
                    role=raw["role"],
                    external_flow=raw.get("external_flow", 0.0),
                )
            )
        except KeyError as exc:
            raise InvalidConfig(f"links[{i}] lacks key {exc.args[0]!r}") from None
    return GeneralNetwork(tuple(built), origin, destination, frozenset(nodes))
