"""Production auction solver: path and cycle pushes over the derived graph.

Handles capacitated (bts) instances and treats btp as the unbounded special
case.  Flow moves in bulk along alternating paths; cycles are resolved with a
closed-form geometric update instead of revolution-by-revolution simulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .certify import Certificate, certify
from .derived_graph import DerivedGraph, PathKind
from .instance import ProblemInstance, SolverConfig, check_valid
from .state import DualState, Numerics, PrimalState, Snapshot, make_states


@dataclass
class RunStats:
    """Counters witnessing the charging argument; plain ints, exported as a dict."""

    counts: dict[str, int] = field(default_factory=dict)
    beta_rises_per_sink: dict[int, int] = field(default_factory=dict)

    def bump(self, key: str, amount: int = 1) -> None:
        self.counts[key] = self.counts.get(key, 0) + amount

    def get(self, key: str, default: int = 0) -> int:
        return self.counts.get(key, default)

    def operations(self) -> int:
        return (
            self.get("walk_steps") + self.get("flow_updates") + self.get("heap_updates")
        )

    def to_dict(self) -> dict[str, int]:
        out = dict(sorted(self.counts.items()))
        out["operations"] = self.operations()
        return out


@dataclass
class PushReport:
    """Effects of one bulk push: amounts moved and every edge-set event."""

    moved: bool = False
    start_surplus_cleared: bool = False
    saturated_edges: list[int] = field(default_factory=list)
    zeroed_edges: list[int] = field(default_factory=list)
    touched_sinks: set[int] = field(default_factory=set)


@dataclass(frozen=True)
class CycleGeometry:
    """Transfer ratios and per-edge revolution limits for one alternating cycle.

    pairs[z] is the (forward, back) edge pair at position z; ratio[z] the flow
    rescaling across the back edge; cum_before[z] / cum_through[z] the product
    of ratios up to (exclusive / inclusive) position z; rho_cycle their full
    product.  limit_fwd / limit_back hold the largest whole number of
    revolutions each capacity admits (None = unlimited), r_min their minimum.
    """

    pairs: tuple[tuple[int, int], ...]
    entry_surplus: Fraction | float
    ratio: tuple
    cum_before: tuple
    cum_through: tuple
    rho_cycle: Fraction | float
    limit_fwd: tuple
    limit_back: tuple
    r_min: int | None
    limit_index: tuple[str, int] | None


def geometric_limit(first, rho_cycle, cap, num: Numerics) -> int | None:
    """Largest r with sum_{t=0..r} first*rho_cycle^t <= cap; None if every r fits.

    Closed forms only: g(r) = first*(r+1) when the cycle ratio is 1, otherwise
    first*(1-q^(r+1))/(1-q).  r = -1 means not even one revolution fits.
    Integer comparisons on exact rationals; no logarithms.
    """
    if not num.is_pos(first):
        raise ValueError("per-revolution amount must be positive")
    if num.is_pos(first - cap):
        return -1
    q = rho_cycle
    if num.eq(q, num.value(1)):
        # g(r) = first*(r+1) <= cap
        r = int(cap / first) - 1
        while num.le(first * (r + 2), cap):
            r += 1
        return r
    if q < 1 and num.le(first / (1 - q), cap):
        return None

    def fits(r: int) -> bool:
        return num.le(first * (1 - q ** (r + 1)) / (1 - q), cap)

    hi = 1
    while fits(hi):
        hi *= 2
    lo = 0  # fits(0) holds: first <= cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _geometric_sum(q, r: int | None, num: Numerics):
    """sum_{t=0..r} q^t, with r=None meaning the converged infinite series."""
    one = num.value(1)
    if r is None:
        return one / (one - q)
    if r < 0:
        return num.value(0)
    if num.eq(q, one):
        return num.value(r + 1)
    return (one - q ** (r + 1)) / (one - q)


def _apply_flow(
    primal: PrimalState,
    dual: DualState,
    graph: DerivedGraph,
    stats: RunStats,
    report: PushReport,
    e: int,
    delta,
    set_valuation: bool,
) -> None:
    num = primal.num
    primal.add_flow(e, delta)
    stats.bump("flow_updates")
    spec = primal.instance.edges[e]
    report.touched_sinks.add(spec.dst)
    report.moved = True
    if not num.is_pos(primal.flow[e]):
        # exact pushes land on zero; float mode may leave dust
        primal.flow[e] = num.value(0)
        dual.valuation.pop(e, None)
        report.zeroed_edges.append(e)
        stats.bump("back_edge_zeroings")
    elif set_valuation:
        dual.valuation[e] = dual.beta[spec.dst]
    if primal.edge_saturated(e) and delta > 0:
        report.saturated_edges.append(e)
        stats.bump("forward_saturations")
    graph.note_flow_changed(e)


def push_flow_path(
    primal: PrimalState,
    dual: DualState,
    graph: DerivedGraph,
    steps: list[tuple[str, int]],
    stats: RunStats,
) -> PushReport:
    """Transfer the first source's surplus along alternating forward/back steps.

    The amount is clamped at every forward edge by its remaining capacity and
    at every back edge by its price-rescaled flow; across a back edge the
    amount is multiplied by p_fwd/p_back, so each intermediate sink's
    price-weighted inflow is unchanged.  A trailing forward step (path ending
    at a sink) is additionally clamped by the sink's remaining budget.
    Clamping strands the unsent remainder as surplus where it stood.
    """
    report = PushReport()
    if not steps:
        return report
    num = primal.num
    instance = primal.instance
    start = instance.edges[steps[0][1]].src
    phi = primal.surplus[start]
    if not num.is_pos(phi):
        return report

    k = 0
    while k + 1 < len(steps):
        fwd = steps[k][1]
        back = steps[k + 1][1]
        fwd_spec = instance.edges[fwd]
        back_spec = instance.edges[back]
        residual = primal.forward_residual(fwd)
        if residual is not None and residual < phi:
            phi = residual
        back_limit = primal.flow[back] * back_spec.price / fwd_spec.price
        if back_limit < phi:
            phi = back_limit
        if not num.is_pos(phi):
            phi = num.value(0)
            break
        _apply_flow(primal, dual, graph, stats, report, fwd, phi, set_valuation=True)
        phi = phi * fwd_spec.price / back_spec.price
        _apply_flow(primal, dual, graph, stats, report, back, -phi, set_valuation=False)
        k += 2

    if k < len(steps) and num.is_pos(phi):
        # path ends at a sink: one forward push bounded by capacity and budget
        e = steps[k][1]
        spec = instance.edges[e]
        residual = primal.forward_residual(e)
        if residual is not None and residual < phi:
            phi = residual
        budget_room = primal.residual[spec.dst] / spec.price
        if budget_room < phi:
            phi = budget_room
        if num.is_pos(phi):
            _apply_flow(primal, dual, graph, stats, report, e, phi, set_valuation=True)
            if primal.sink_saturated(spec.dst):
                primal.residual[spec.dst] = num.value(0)

    if not num.is_pos(primal.surplus[start]):
        primal.surplus[start] = num.value(0)
        report.start_surplus_cleared = True
        stats.bump("surplus_clears")
    return report


def cycle_geometry(
    primal: PrimalState,
    dual: DualState,
    pairs: list[tuple[int, int]],
    entry_surplus,
) -> CycleGeometry:
    """One O(|C|) traversal computing every ratio and revolution limit."""
    num = primal.num
    instance = primal.instance
    sources = [instance.edges[f].src for f, _ in pairs]
    sinks = [instance.edges[f].dst for f, _ in pairs]
    if len(set(sources)) != len(sources) or len(set(sinks)) != len(sinks):
        raise ValueError("cycle must be simple")
    for z, (fwd, back) in enumerate(pairs):
        nxt = sources[(z + 1) % len(pairs)]
        if instance.edges[back].dst != sinks[z] or instance.edges[back].src != nxt:
            raise ValueError("pairs do not form an alternating cycle")
    if not num.is_pos(entry_surplus):
        raise ValueError("cycle entry needs positive surplus")

    one = num.value(1)
    ratio, cum_before, cum_through = [], [], []
    acc = one
    for fwd, back in pairs:
        rho = num.value(instance.edges[fwd].price) / instance.edges[back].price
        ratio.append(rho)
        cum_before.append(acc)
        acc = acc * rho
        cum_through.append(acc)
    rho_cycle = acc

    limit_fwd: list[int | None] = []
    limit_back: list[int | None] = []
    r_min: int | None = None
    limit_index: tuple[str, int] | None = None
    for z, (fwd, back) in enumerate(pairs):
        residual = primal.forward_residual(fwd)
        if residual is None:
            lf = None
        else:
            lf = geometric_limit(entry_surplus * cum_before[z], rho_cycle, residual, num)
        limit_fwd.append(lf)
        lb = geometric_limit(
            entry_surplus * cum_through[z], rho_cycle, primal.flow[back], num
        )
        limit_back.append(lb)
        for tag, lim in (("fwd", lf), ("back", lb)):
            if lim is not None and (r_min is None or lim < r_min):
                r_min, limit_index = lim, (tag, z)
    if rho_cycle >= 1 and r_min is None:
        raise RuntimeError("non-shrinking cycle must have a finite revolution limit")
    return CycleGeometry(
        pairs=tuple(pairs),
        entry_surplus=entry_surplus,
        ratio=tuple(ratio),
        cum_before=tuple(cum_before),
        cum_through=tuple(cum_through),
        rho_cycle=rho_cycle,
        limit_fwd=tuple(limit_fwd),
        limit_back=tuple(limit_back),
        r_min=r_min,
        limit_index=limit_index,
    )


def apply_cycle_bulk(
    primal: PrimalState,
    dual: DualState,
    graph: DerivedGraph,
    geom: CycleGeometry,
    stats: RunStats,
    report: PushReport,
) -> None:
    """All admissible whole revolutions as one geometric-sum update per edge."""
    num = primal.num
    factor = _geometric_sum(geom.rho_cycle, geom.r_min, num)
    if not num.is_pos(factor):
        return
    s = geom.entry_surplus
    for z, (fwd, back) in enumerate(geom.pairs):
        _apply_flow(
            primal, dual, graph, stats, report, fwd,
            s * geom.cum_before[z] * factor, set_valuation=True,
        )
        _apply_flow(
            primal, dual, graph, stats, report, back,
            -(s * geom.cum_through[z] * factor), set_valuation=False,
        )


def push_flow_cycle(
    primal: PrimalState,
    dual: DualState,
    graph: DerivedGraph,
    pairs: list[tuple[int, int]],
    stats: RunStats,
) -> PushReport:
    """Send the entry source's surplus around the cycle in closed form.

    All full revolutions up to the limit are applied as one bulk update per
    edge (the geometric sum, or its limit when no capacity ever binds); when
    the limit is finite one more clamped revolution runs to pin the limiting
    edge at its capacity, and the leftover is relayed to the source just
    before it.  Ends with the entry surplus cleared, a back edge zeroed, or a
    forward edge saturated.
    """
    report = PushReport()
    num = primal.num
    instance = primal.instance
    entry = instance.edges[pairs[0][0]].src
    s = primal.surplus[entry]
    if not num.is_pos(s):
        return report
    geom = cycle_geometry(primal, dual, pairs, s)
    apply_cycle_bulk(primal, dual, graph, geom, stats, report)
    stats.bump("cycle_pushes")

    if geom.r_min is None:
        # shrinking cycle, no cap binds: the surplus drains completely
        if not num.is_pos(primal.surplus[entry]):
            primal.surplus[entry] = num.value(0)
        assert num.is_zero(primal.surplus[entry]), "converged cycle left surplus"
        report.start_surplus_cleared = True
        stats.bump("surplus_clears")
        return report

    # one more clamped revolution saturates/zeroes the limiting edge exactly
    flat: list[tuple[str, int]] = []
    for fwd, back in pairs:
        flat.append(("fwd", fwd))
        flat.append(("back", back))
    extra = push_flow_path(primal, dual, graph, flat, stats)
    report.touched_sinks |= extra.touched_sinks
    report.saturated_edges += extra.saturated_edges
    report.zeroed_edges += extra.zeroed_edges
    report.moved = report.moved or extra.moved

    bind = None
    for z, (fwd, back) in enumerate(pairs):
        if primal.edge_saturated(fwd) or not num.is_pos(primal.flow[back]):
            bind = z
            break
    assert bind is not None, "finite revolution limit but no edge reached capacity"
    relay = flat[: 2 * bind]
    if relay and num.is_pos(primal.surplus[entry]):
        tail = push_flow_path(primal, dual, graph, relay, stats)
        report.touched_sinks |= tail.touched_sinks
        report.saturated_edges += tail.saturated_edges
        report.zeroed_edges += tail.zeroed_edges
        report.moved = report.moved or tail.moved
    if not num.is_pos(primal.surplus[entry]):
        primal.surplus[entry] = num.value(0)
        report.start_surplus_cleared = True
        stats.bump("surplus_clears")
    return report


def gamma_view(
    instance: ProblemInstance, primal: PrimalState, dual: DualState
) -> dict[int, Fraction | float]:
    """Implicit edge duals: max(0, c - p*beta - alpha) on saturated edges only."""
    num = primal.num
    out = {}
    for e in range(len(instance.edges)):
        if primal.edge_saturated(e):
            slack = dual.effective_profit(e) - dual.alpha[instance.edges[e].src]
            out[e] = slack if num.is_pos(slack) else num.value(0)
    return out


def beta_update_pass(
    primal: PrimalState,
    dual: DualState,
    graph: DerivedGraph,
    stats: RunStats,
    candidates=None,
) -> list[int]:
    """Raise the price of each saturated candidate sink with no back edge left.

    A zero price initializes to epsilon * min(c/p) over the sink's profitable
    in-edges; a positive one multiplies by (1+epsilon).  Saturated in-edges
    whose signed slack turns negative become back edges implicitly (their
    implicit edge dual has hit zero), which is what lets them unsaturate
    later.  Ends by refreshing preferred edges and clearing two-cycles for
    every affected source.  Returns the sinks whose price rose.
    """
    num = primal.num
    instance = primal.instance
    sinks = sorted(candidates) if candidates is not None else range(instance.m)
    risen = []
    for j in sinks:
        if not primal.sink_saturated(j):
            continue
        if graph.back_edges(j):
            continue
        if num.is_zero(dual.beta[j]):
            rates = [
                Fraction(instance.edges[e].profit, instance.edges[e].price)
                for e in instance.edges_of_sink(j)
                if instance.edges[e].profit > 0
            ]
            if not rates:
                continue
            dual.raise_beta(j, dual.epsilon * num.value(min(rates)))
            stats.bump("beta_inits")
        else:
            dual.raise_beta(j, dual.beta[j] * (1 + dual.epsilon))
            stats.bump("beta_rises")
            stats.beta_rises_per_sink[j] = stats.beta_rises_per_sink.get(j, 0) + 1
        graph.note_beta_changed(j)
        risen.append(j)
    if risen:
        affected = {
            instance.edges[e].src for j in risen for e in instance.edges_of_sink(j)
        }
        for i in sorted(affected):
            graph.ensure_fresh(i)
            graph.fix_two_cycle(i)
    return risen


@dataclass
class Solution:
    instance: ProblemInstance
    config: SolverConfig
    flow: list
    alpha: list
    beta: list
    certificate: Certificate
    stats: RunStats
    terminated: bool

    @property
    def primal_value(self):
        return self.certificate.primal_value

    @property
    def dual_value(self):
        return self.certificate.dual_value


def solve(
    instance: ProblemInstance,
    config: SolverConfig | None = None,
    on_iteration=None,
    debug: bool = False,
) -> Solution:
    """Run the path/cycle auction until no source has both surplus and alpha > 0.

    Parameters
    ----------
    instance : ProblemInstance
        btp or bts instance; validated before the run starts.
    config : SolverConfig
        epsilon, numeric mode, optional phase cap.
    on_iteration : callable, optional
        Receives a read-only Snapshot after every main-loop iteration.
    debug : bool
        Keep the derived graph's edge-set event log.

    Returns
    -------
    Solution with exact flows, duals, a certificate recomputed from scratch,
    and the run counters.  `terminated` is False only when max_phases was hit;
    the partial state is still returned and certified as-is.
    """
    config = config or SolverConfig()
    check_valid(instance)
    primal, dual, num = make_states(instance, config)
    stats = RunStats()
    graph = DerivedGraph(instance, primal, dual, counters=stats.counts, debug=debug)
    terminated = True
    cursor = 0
    while True:
        picked = None
        for offset in range(instance.n):
            i = (cursor + offset) % instance.n
            if not num.is_pos(primal.surplus[i]):
                continue
            graph.ensure_fresh(i)
            if num.is_pos(dual.alpha[i]):
                picked = i
                break
        if picked is None:
            break
        if config.max_phases is not None and stats.get("phases") >= config.max_phases:
            terminated = False
            break
        stats.bump("phases")
        cursor = (picked + 1) % instance.n

        path = graph.find_path(picked)
        touched: set[int] = set()
        if path.kind is PathKind.TYPE_III:
            prefix, pairs = path.split_cycle()
            if len(pairs) == 1 and pairs[0][0] == pairs[0][1]:
                # degenerate loop through a single edge: same as a two-cycle end
                report = push_flow_path(primal, dual, graph, prefix, stats)
                touched |= report.touched_sinks
                e = pairs[0][0]
                j = instance.edges[e].dst
                if e in dual.valuation:
                    dual.valuation[e] = dual.beta[j]
                touched.add(j)
                stats.bump("two_cycle_eliminations")
                graph.note_flow_changed(e)
            else:
                report = push_flow_path(primal, dual, graph, prefix, stats)
                touched |= report.touched_sinks
                entry = instance.edges[pairs[0][0]].src
                if num.is_pos(primal.surplus[entry]):
                    report = push_flow_cycle(primal, dual, graph, pairs, stats)
                    touched |= report.touched_sinks
        elif path.kind is PathKind.TYPE_II:
            report = push_flow_path(primal, dual, graph, path.steps[:-1], stats)
            touched |= report.touched_sinks
            e = path.two_cycle_edge
            j = instance.edges[e].dst
            if e in dual.valuation:
                dual.valuation[e] = dual.beta[j]
            touched.add(j)
            stats.bump("two_cycle_eliminations")
            graph.note_flow_changed(e)
        elif path.kind is PathKind.STALLED:
            report = push_flow_path(primal, dual, graph, path.steps[:-1], stats)
            touched |= report.touched_sinks
            touched.add(path.stalled_sink)
            stats.bump("stalls")
        else:
            report = push_flow_path(primal, dual, graph, path.steps, stats)
            touched |= report.touched_sinks
            if path.endpoint[0] == "src":
                stats.bump("path_pushes_to_source")
            stats.bump("path_pushes")

        beta_update_pass(primal, dual, graph, stats, candidates=touched)
        if on_iteration is not None:
            on_iteration(Snapshot.of(primal, dual, stats.get("phases")))

    certificate = certify(
        instance,
        list(primal.flow),
        list(dual.alpha),
        list(dual.beta),
        config.epsilon,
        rigorous=num.exact,
        tol=0 if num.exact else config.float_tol,
    )
    return Solution(
        instance=instance,
        config=config,
        flow=list(primal.flow),
        alpha=list(dual.alpha),
        beta=list(dual.beta),
        certificate=certificate,
        stats=stats,
        terminated=terminated,
    )
