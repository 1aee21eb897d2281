"""Instance transforms: piecewise-linear profits and generalized flow.

Concave piecewise-linear profit edges split into parallel capacitated segments
solvable by the bts solver; min-cost generalized flow maps onto an
equality-constrained min-cost transportation instance and back, preserving
cost exactly.  All transform arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import EdgeSpec, InstanceFormatError, Kind, ProblemInstance, check_valid
from .oracle import solve_equality_lp


# ---------------------------------------------------------------------------
# concave piecewise-linear profits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseEdge:
    """Edge whose profit is concave piecewise linear: slopes[k] on the k-th
    interval of fixed length `segment_length`."""

    src: int
    dst: int
    price: int
    slopes: tuple[int, ...]


@dataclass(frozen=True)
class PiecewiseInstance:
    supply: tuple[int, ...]
    budget: tuple[int, ...]
    segment_length: int
    edges: tuple[PiecewiseEdge, ...]

    @property
    def n(self) -> int:
        return len(self.supply)

    @property
    def m(self) -> int:
        return len(self.budget)


@dataclass(frozen=True)
class EdgeMap:
    """Which split edges realize each original edge, in segment order."""

    segment_length: int
    groups: tuple[tuple[int, ...], ...]  # groups[o][k] = split edge index


def validate_piecewise(pw: PiecewiseInstance) -> list[str]:
    issues = []
    if pw.segment_length < 1:
        issues.append("segment length must be at least 1")
    seen: set[tuple[int, int]] = set()
    for o, edge in enumerate(pw.edges):
        if (edge.src, edge.dst) in seen:
            issues.append(f"edge {o}: duplicate pair (one profile per source-sink pair)")
        seen.add((edge.src, edge.dst))
        if not edge.slopes:
            issues.append(f"edge {o}: empty profile")
        if any(a < b for a, b in zip(edge.slopes, edge.slopes[1:])):
            issues.append(f"edge {o}: profile not concave (slopes must not increase)")
        if any(s < 0 for s in edge.slopes):
            issues.append(f"edge {o}: negative slope unsupported")
        if edge.price < 1:
            issues.append(f"edge {o}: zero price")
    return issues


def split_piecewise(pw: PiecewiseInstance) -> tuple[ProblemInstance, EdgeMap]:
    """Each profile edge becomes one capacitated edge per segment.

    Segment k gets capacity `segment_length`, profit slopes[k] and the
    original price; the duplicate-edge rule keys on (src, dst, segment).
    """
    issues = validate_piecewise(pw)
    if issues:
        raise ValueError("; ".join(issues))
    edges = []
    groups = []
    for edge in pw.edges:
        group = []
        for k, slope in enumerate(edge.slopes, start=1):
            group.append(len(edges))
            edges.append(
                EdgeSpec(
                    src=edge.src,
                    dst=edge.dst,
                    profit=slope,
                    price=edge.price,
                    capacity=pw.segment_length,
                    segment=k,
                )
            )
        groups.append(tuple(group))
    instance = ProblemInstance(
        kind=Kind.BTS, supply=pw.supply, budget=pw.budget, edges=tuple(edges)
    )
    return check_valid(instance), EdgeMap(pw.segment_length, tuple(groups))


def fill_order_holds(flows, edge_map: EdgeMap) -> bool:
    """No segment carries flow while an earlier segment of its edge has room."""
    cap = edge_map.segment_length
    for group in edge_map.groups:
        for z1 in range(len(group)):
            if flows[group[z1]] < cap:
                if any(flows[group[z2]] > 0 for z2 in range(z1 + 1, len(group))):
                    return False
    return True


def normalize_split_solution(flows, edge_map: EdgeMap):
    """Shift flow toward earlier segments until the fill order holds.

    Equivalent to repeatedly transferring min(l - f_z1, f_z2) from a later
    segment to an earlier unfilled one.  Prices agree across segments, so
    every constraint is preserved; concavity means profit never decreases.
    """
    out = list(flows)
    cap = edge_map.segment_length
    for group in edge_map.groups:
        total = sum((out[e] for e in group), start=Fraction(0))
        for e in group:
            take = min(Fraction(cap), total)
            out[e] = take
            total -= take
        assert total == 0
    return out


def reassemble(flows, edge_map: EdgeMap) -> list[Fraction]:
    """Per-original-edge totals; requires the fill order (normalize first)."""
    if not fill_order_holds(flows, edge_map):
        raise ValueError("fill order violated; normalize the split solution first")
    return [sum((flows[e] for e in group), start=Fraction(0)) for group in edge_map.groups]


def piecewise_profit(pw: PiecewiseInstance, original_edge: int, amount) -> Fraction:
    """Evaluate the concave profile of one edge at a given flow amount."""
    remaining = Fraction(amount)
    total = Fraction(0)
    for slope in pw.edges[original_edge].slopes:
        step = min(Fraction(pw.segment_length), remaining)
        if step <= 0:
            break
        total += slope * step
        remaining -= step
    if remaining > 0:
        raise ValueError("amount exceeds the profile's domain")
    return total


# ---------------------------------------------------------------------------
# min-cost generalized flow  <->  equality-constrained min-cost transportation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    cost: Fraction
    capacity: Fraction
    multiplier: Fraction


@dataclass(frozen=True)
class GenFlowInstance:
    """Digraph with per-arc gain/loss multipliers, one source and one sink.

    Arc flow f is consumed at the tail and delivers multiplier*f at the head.
    The source has no incoming arcs and the sink no outgoing ones.
    """

    num_nodes: int
    arcs: tuple[Arc, ...]
    source: int
    supply: Fraction
    sink: int
    demand: Fraction


def validate_gflow(g: GenFlowInstance) -> list[str]:
    issues = []
    if g.source == g.sink:
        issues.append("source and sink must differ")
    if not (0 <= g.source < g.num_nodes and 0 <= g.sink < g.num_nodes):
        issues.append("source/sink out of range")
    if g.supply < 0 or g.demand < 0:
        issues.append("negative supply or demand")
    for a, arc in enumerate(g.arcs):
        if not (0 <= arc.tail < g.num_nodes and 0 <= arc.head < g.num_nodes):
            issues.append(f"arc {a}: endpoint out of range")
        if arc.capacity <= 0:
            issues.append(f"arc {a}: capacity must be positive")
        if arc.multiplier <= 0:
            issues.append(f"arc {a}: multiplier must be positive")
        if arc.head == g.source:
            issues.append(f"arc {a}: arcs into the source are not supported")
        if arc.tail == g.sink:
            issues.append(f"arc {a}: arcs out of the sink are not supported")
    return issues


def check_gflow_feasible(g: GenFlowInstance, flows) -> list[str]:
    """Violated constraints of a candidate arc flow, empty if feasible."""
    issues = []
    if len(flows) != len(g.arcs):
        return ["flow vector length does not match arc count"]
    for a, arc in enumerate(g.arcs):
        if flows[a] < 0:
            issues.append(f"arc {a}: negative flow")
        if flows[a] > arc.capacity:
            issues.append(f"arc {a}: capacity exceeded")
    for node in range(g.num_nodes):
        inflow = sum(
            (arc.multiplier * flows[a] for a, arc in enumerate(g.arcs) if arc.head == node),
            start=Fraction(0),
        )
        outflow = sum(
            (flows[a] for a, arc in enumerate(g.arcs) if arc.tail == node),
            start=Fraction(0),
        )
        if node == g.source:
            if outflow != g.supply:
                issues.append(f"source outflow {outflow} != supply {g.supply}")
        elif node == g.sink:
            if inflow != g.demand:
                issues.append(f"sink inflow {inflow} != demand {g.demand}")
        elif inflow != outflow:
            issues.append(f"node {node}: conservation violated ({inflow} != {outflow})")
    return issues


@dataclass(frozen=True)
class MincostEdge:
    src: int
    dst: int
    cost: Fraction
    price: Fraction


@dataclass(frozen=True)
class MincostBtpInstance:
    """Equality-constrained transportation LP with rational data.

    Sources must ship exactly their supply and sinks receive price-weighted
    flow exactly equal to their budget; the objective is minimized (or
    maximized after the profit shift).  This form exists to carry the
    generalized-flow reduction; it is not fed to the approximation solver.
    """

    supply: tuple[Fraction, ...]
    budget: tuple[Fraction, ...]
    edges: tuple[MincostEdge, ...]
    sense: str = "min"
    tag: str = ""

    @property
    def n(self) -> int:
        return len(self.supply)

    @property
    def m(self) -> int:
        return len(self.budget)


@dataclass(frozen=True)
class GFlowMapper:
    """Index bookkeeping for the arc-to-sink transform.

    Arc a feeds sink a; its slack edge (from the tail node's source, price 1,
    cost 0) is tail_edge[a] and its carry edge (from the head node's source,
    price 1/mu, cost c/mu) is head_edge[a].  The extra sink holds the supply
    via supply_edge from the source node.
    """

    g: GenFlowInstance
    tail_edge: tuple[int, ...]
    head_edge: tuple[int, ...]
    supply_sink: int
    supply_edge: int


def gflow_to_btp(g: GenFlowInstance) -> tuple[MincostBtpInstance, GFlowMapper]:
    """One source per node, one sink per arc plus a supply sink.

    Node i's supply is the total capacity leaving i (the sink node gets the
    demand instead; arc-less nodes get zero).  Arc (i,j) becomes a sink with
    budget u_ij fed by a free slack edge from node i and by a carry edge from
    node j with cost c_ij/mu_ij and price 1/mu_ij.
    """
    issues = validate_gflow(g)
    if issues:
        raise ValueError("; ".join(issues))
    supply = []
    for node in range(g.num_nodes):
        if node == g.sink:
            supply.append(Fraction(g.demand))
        else:
            supply.append(
                sum(
                    (arc.capacity for arc in g.arcs if arc.tail == node),
                    start=Fraction(0),
                )
            )
    budget = [Fraction(arc.capacity) for arc in g.arcs]
    edges: list[MincostEdge] = []
    tail_edge, head_edge = [], []
    for a, arc in enumerate(g.arcs):
        tail_edge.append(len(edges))
        edges.append(MincostEdge(src=arc.tail, dst=a, cost=Fraction(0), price=Fraction(1)))
        head_edge.append(len(edges))
        edges.append(
            MincostEdge(
                src=arc.head,
                dst=a,
                cost=arc.cost / arc.multiplier,
                price=1 / arc.multiplier,
            )
        )
    supply_sink = len(budget)
    budget.append(Fraction(g.supply))
    supply_edge = len(edges)
    edges.append(MincostEdge(src=g.source, dst=supply_sink, cost=Fraction(0), price=Fraction(1)))
    instance = MincostBtpInstance(
        supply=tuple(supply), budget=tuple(budget), edges=tuple(edges)
    )
    return instance, GFlowMapper(
        g=g,
        tail_edge=tuple(tail_edge),
        head_edge=tuple(head_edge),
        supply_sink=supply_sink,
        supply_edge=supply_edge,
    )


def check_mincost_feasible(instance: MincostBtpInstance, flows) -> list[str]:
    issues = []
    if len(flows) != len(instance.edges):
        return ["flow vector length does not match edge count"]
    for e, f in enumerate(flows):
        if f < 0:
            issues.append(f"edge {e}: negative flow")
    for i in range(instance.n):
        total = sum(
            (flows[e] for e, spec in enumerate(instance.edges) if spec.src == i),
            start=Fraction(0),
        )
        if total != instance.supply[i]:
            issues.append(f"source {i}: ships {total}, supply is {instance.supply[i]}")
    for j in range(instance.m):
        total = sum(
            (spec.price * flows[e] for e, spec in enumerate(instance.edges) if spec.dst == j),
            start=Fraction(0),
        )
        if total != instance.budget[j]:
            issues.append(f"sink {j}: receives {total}, budget is {instance.budget[j]}")
    return issues


def map_flow_forward(flows, mapper: GFlowMapper) -> list[Fraction]:
    """Arc flow -> transportation flow of identical cost (checked feasible)."""
    issues = check_gflow_feasible(mapper.g, flows)
    if issues:
        raise ValueError("; ".join(issues))
    out = [Fraction(0)] * (2 * len(mapper.g.arcs) + 1)
    for a, arc in enumerate(mapper.g.arcs):
        out[mapper.tail_edge[a]] = arc.capacity - Fraction(flows[a])
        out[mapper.head_edge[a]] = arc.multiplier * Fraction(flows[a])
    out[mapper.supply_edge] = Fraction(mapper.g.supply)
    return out


def map_flow_back(flows, mapper: GFlowMapper) -> list[Fraction]:
    """Transportation flow -> arc flow of identical cost (checked feasible)."""
    instance, _ = gflow_to_btp(mapper.g)
    issues = check_mincost_feasible(instance, flows)
    if issues:
        raise ValueError("; ".join(issues))
    return [
        Fraction(flows[mapper.head_edge[a]]) / arc.multiplier
        for a, arc in enumerate(mapper.g.arcs)
    ]


def transport_cost(instance: MincostBtpInstance, flows) -> Fraction:
    return sum(
        (spec.cost * flows[e] for e, spec in enumerate(instance.edges)),
        start=Fraction(0),
    )


def gflow_cost(g: GenFlowInstance, flows) -> Fraction:
    return sum((arc.cost * flows[a] for a, arc in enumerate(g.arcs)), start=Fraction(0))


def mincost_to_maxprofit(instance: MincostBtpInstance, big_m) -> MincostBtpInstance:
    """Turn the min-cost instance into max-profit via profits big_m - cost.

    Exactness of the translation needs big_m beyond the LP's granularity, and
    an approximate solution of the shifted instance does not translate back
    into an approximation for the original; outputs are tagged accordingly.
    """
    big_m = Fraction(big_m)
    top = max(spec.cost for spec in instance.edges)
    if big_m <= top:
        raise ValueError(f"shift constant must exceed the largest cost {top}")
    return MincostBtpInstance(
        supply=instance.supply,
        budget=instance.budget,
        edges=tuple(
            MincostEdge(spec.src, spec.dst, big_m - spec.cost, spec.price)
            for spec in instance.edges
        ),
        sense="max",
        tag="heuristic-bridge",
    )


def mincost_exact_opt(
    instance: MincostBtpInstance, maximize: bool | None = None
) -> tuple[Fraction, list[Fraction]]:
    """Exact optimum of the equality-constrained LP by support enumeration."""
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    ne = len(instance.edges)
    for i in range(instance.n):
        row = [Fraction(0)] * ne
        for e, spec in enumerate(instance.edges):
            if spec.src == i:
                row[e] = Fraction(1)
        rows.append(row)
        rhs.append(instance.supply[i])
    for j in range(instance.m):
        row = [Fraction(0)] * ne
        for e, spec in enumerate(instance.edges):
            if spec.dst == j:
                row[e] = spec.price
        rows.append(row)
        rhs.append(instance.budget[j])
    costs = [spec.cost for spec in instance.edges]
    if maximize is None:
        maximize = instance.sense == "max"
    return solve_equality_lp(rows, rhs, costs, maximize=maximize)


# ---------------------------------------------------------------------------
# file formats for the transform inputs and outputs
# ---------------------------------------------------------------------------


def _ratio(token: str, line_no: int) -> Fraction:
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            return Fraction(int(num), int(den))
        return Fraction(int(token))
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(line_no, f"bad rational {token!r}") from None


def _ratio_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_piecewise(text: str) -> PiecewiseInstance:
    """Format: `p pw n m E` header, s/t lines, `e i j p pw l c1 c2 ...` edges."""
    header = None
    supply: dict[int, int] = {}
    budget: dict[int, int] = {}
    edges: list[PiecewiseEdge] = []
    seg_len: int | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[:2] != ["p", "pw"] or len(tokens) != 5:
                raise InstanceFormatError(line_no, "header needs: p pw <n> <m> <E>")
            header = tuple(int(t) for t in tokens[2:])
            continue
        if tokens[0] == "s":
            supply[int(tokens[1])] = int(tokens[2])
        elif tokens[0] == "t":
            budget[int(tokens[1])] = int(tokens[2])
        elif tokens[0] == "e":
            if len(tokens) < 7 or tokens[4] != "pw":
                raise InstanceFormatError(
                    line_no, "piecewise edge needs: e <i> <j> <p> pw <l> <c1> ..."
                )
            length = int(tokens[5])
            if seg_len is None:
                seg_len = length
            elif seg_len != length:
                raise InstanceFormatError(line_no, "segment length must be uniform")
            edges.append(
                PiecewiseEdge(
                    src=int(tokens[1]) - 1,
                    dst=int(tokens[2]) - 1,
                    price=int(tokens[3]),
                    slopes=tuple(int(t) for t in tokens[6:]),
                )
            )
        else:
            raise InstanceFormatError(line_no, f"unknown record {tokens[0]!r}")
    if header is None:
        raise InstanceFormatError(1, "empty input: missing 'p pw' header")
    n, m, ne = header
    if len(edges) != ne:
        raise InstanceFormatError(1, f"header declares {ne} edges, found {len(edges)}")
    pw = PiecewiseInstance(
        supply=tuple(supply[i] for i in range(1, n + 1)),
        budget=tuple(budget[j] for j in range(1, m + 1)),
        segment_length=seg_len if seg_len is not None else 1,
        edges=tuple(edges),
    )
    issues = validate_piecewise(pw)
    if issues:
        raise ValueError("; ".join(issues))
    return pw


def serialize_piecewise(pw: PiecewiseInstance) -> str:
    lines = [f"p pw {pw.n} {pw.m} {len(pw.edges)}"]
    lines += [f"s {i + 1} {a}" for i, a in enumerate(pw.supply)]
    lines += [f"t {j + 1} {b}" for j, b in enumerate(pw.budget)]
    for edge in sorted(pw.edges, key=lambda e: (e.src, e.dst)):
        slopes = " ".join(str(c) for c in edge.slopes)
        lines.append(
            f"e {edge.src + 1} {edge.dst + 1} {edge.price} pw {pw.segment_length} {slopes}"
        )
    return "\n".join(lines) + "\n"


def parse_gflow(text: str) -> GenFlowInstance:
    """Format: `g |V| |A|`, `a i j c u mu` per arc, `src s d_s`, `snk t d_t`."""
    header = None
    arcs: list[Arc] = []
    source = sink = None
    supply = demand = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[0] != "g" or len(tokens) != 3:
                raise InstanceFormatError(line_no, "header needs: g <|V|> <|A|>")
            header = (int(tokens[1]), int(tokens[2]))
            continue
        if tokens[0] == "a":
            if len(tokens) != 6:
                raise InstanceFormatError(line_no, "arc needs: a <i> <j> <c> <u> <mu>")
            arcs.append(
                Arc(
                    tail=int(tokens[1]) - 1,
                    head=int(tokens[2]) - 1,
                    cost=_ratio(tokens[3], line_no),
                    capacity=_ratio(tokens[4], line_no),
                    multiplier=_ratio(tokens[5], line_no),
                )
            )
        elif tokens[0] == "src":
            source, supply = int(tokens[1]) - 1, _ratio(tokens[2], line_no)
        elif tokens[0] == "snk":
            sink, demand = int(tokens[1]) - 1, _ratio(tokens[2], line_no)
        else:
            raise InstanceFormatError(line_no, f"unknown record {tokens[0]!r}")
    if header is None or source is None or sink is None:
        raise InstanceFormatError(1, "missing header, src or snk record")
    if len(arcs) != header[1]:
        raise InstanceFormatError(1, f"header declares {header[1]} arcs, found {len(arcs)}")
    g = GenFlowInstance(
        num_nodes=header[0],
        arcs=tuple(arcs),
        source=source,
        supply=supply,
        sink=sink,
        demand=demand,
    )
    issues = validate_gflow(g)
    if issues:
        raise ValueError("; ".join(issues))
    return g


def serialize_gflow(g: GenFlowInstance) -> str:
    lines = [f"g {g.num_nodes} {len(g.arcs)}"]
    for arc in g.arcs:
        lines.append(
            f"a {arc.tail + 1} {arc.head + 1} {_ratio_str(arc.cost)} "
            f"{_ratio_str(arc.capacity)} {_ratio_str(arc.multiplier)}"
        )
    lines.append(f"src {g.source + 1} {_ratio_str(g.supply)}")
    lines.append(f"snk {g.sink + 1} {_ratio_str(g.demand)}")
    return "\n".join(lines) + "\n"


def serialize_mincost(instance: MincostBtpInstance) -> str:
    lines = [f"p mincost {instance.n} {instance.m} {len(instance.edges)} {instance.sense}"]
    if instance.tag:
        lines.append(f"# tag: {instance.tag}")
    lines += [f"s {i + 1} {_ratio_str(a)}" for i, a in enumerate(instance.supply)]
    lines += [f"t {j + 1} {_ratio_str(b)}" for j, b in enumerate(instance.budget)]
    for spec in instance.edges:
        lines.append(
            f"e {spec.src + 1} {spec.dst + 1} {_ratio_str(spec.cost)} {_ratio_str(spec.price)}"
        )
    return "\n".join(lines) + "\n"


def parse_mincost(text: str) -> MincostBtpInstance:
    header = None
    supply: dict[int, Fraction] = {}
    budget: dict[int, Fraction] = {}
    edges: list[MincostEdge] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[:2] != ["p", "mincost"] or len(tokens) != 6:
                raise InstanceFormatError(line_no, "header needs: p mincost <n> <m> <E> <sense>")
            header = (int(tokens[2]), int(tokens[3]), int(tokens[4]), tokens[5])
            continue
        if tokens[0] == "s":
            supply[int(tokens[1])] = _ratio(tokens[2], line_no)
        elif tokens[0] == "t":
            budget[int(tokens[1])] = _ratio(tokens[2], line_no)
        elif tokens[0] == "e":
            edges.append(
                MincostEdge(
                    src=int(tokens[1]) - 1,
                    dst=int(tokens[2]) - 1,
                    cost=_ratio(tokens[3], line_no),
                    price=_ratio(tokens[4], line_no),
                )
            )
        else:
            raise InstanceFormatError(line_no, f"unknown record {tokens[0]!r}")
    if header is None:
        raise InstanceFormatError(1, "missing 'p mincost' header")
    n, m, ne, sense = header
    if len(edges) != ne:
        raise InstanceFormatError(1, f"header declares {ne} edges, found {len(edges)}")
    return MincostBtpInstance(
        supply=tuple(supply[i] for i in range(1, n + 1)),
        budget=tuple(budget[j] for j in range(1, m + 1)),
        edges=tuple(edges),
        sense=sense,
    )
