"""Reference auction solver for uncapacitated instances.

Single-edge pushes and replacements, driven source by source.  This is the
desk-scale baseline used for differential testing; the production path/cycle
solver lives in `solver`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import Kind, ProblemInstance, SolverConfig, check_valid
from .state import DualState, PrimalState, Snapshot, make_states


@dataclass
class RunStats:
    pushes: int = 0
    replacements: int = 0
    self_promotes: int = 0
    retirements: int = 0
    beta_rises: int = 0
    beta_inits: int = 0
    steps: int = 0

    def to_dict(self) -> dict[str, int]:
        return dict(vars(self))


@dataclass(frozen=True)
class StepOutcome:
    """What one auction step did: push | replace | promote | retire."""

    kind: str
    sink: int | None = None
    displaced: int | None = None
    amount: Fraction | float | None = None


@dataclass
class RunResult:
    primal: PrimalState
    dual: DualState
    stats: RunStats
    terminated: bool


def _reject_capacitated(instance: ProblemInstance) -> None:
    if instance.kind is Kind.BTS or any(e.capacity is not None for e in instance.edges):
        raise ValueError("basic auction handles uncapacitated (btp) instances only")


def initialize(
    instance: ProblemInstance, config: SolverConfig
) -> tuple[PrimalState, DualState]:
    """Zero flow, zero sink prices, alpha_i = max profit out of i."""
    _reject_capacitated(check_valid(instance))
    primal, dual, _ = make_states(instance, config)
    return primal, dual


def update_beta(j: int, primal: PrimalState, dual: DualState, stats: RunStats | None = None) -> str:
    """Raise sink j's price if no flow remains at the lower level.

    Call sites guarantee j is saturated.  A zero price initializes to
    epsilon * min(c/p) over profitable in-edges; otherwise the price rises by
    (1+epsilon) exactly when every positive-flow in-edge sits at the top level.
    Returns "init", "rise", or "none".
    """
    num = dual.num
    instance = primal.instance
    if num.is_zero(dual.beta[j]):
        rates = [
            Fraction(instance.edges[e].profit, instance.edges[e].price)
            for e in instance.edges_of_sink(j)
            if instance.edges[e].profit > 0
        ]
        if not rates:
            return "none"
        dual.raise_beta(j, dual.epsilon * num.value(min(rates)))
        if stats:
            stats.beta_inits += 1
        return "init"
    flows_at_top = [
        num.eq(dual.valuation[e], dual.beta[j])
        for e in instance.edges_of_sink(j)
        if num.is_pos(primal.flow[e])
    ]
    if flows_at_top and all(flows_at_top):
        dual.raise_beta(j, dual.beta[j] * (1 + dual.epsilon))
        if stats:
            stats.beta_rises += 1
        return "rise"
    return "none"


def _best_sink(i: int, primal: PrimalState, dual: DualState) -> tuple[int | None, Fraction | float]:
    best_e, best_key = None, dual.num.value(0)
    for e in primal.instance.edges_of_source(i):
        key = dual.effective_profit(e)
        if best_e is None or key > best_key:
            best_e, best_key = e, key
    return best_e, best_key


def _refresh_alpha(i: int, primal: PrimalState, dual: DualState) -> None:
    _, best_key = _best_sink(i, primal, dual)
    zero = dual.num.value(0)
    dual.alpha[i] = best_key if best_key > zero else zero


def _retire(i: int, primal: PrimalState, dual: DualState, stats: RunStats) -> StepOutcome:
    dual.alpha[i] = dual.num.value(0)
    # Holding flow at the top level would let beta rise past this source's reach.
    for e in primal.instance.edges_of_source(i):
        if e in dual.valuation:
            dual.valuation[e] = dual.beta_companion[primal.instance.edges[e].dst]
    stats.retirements += 1
    return StepOutcome(kind="retire")


def auction_step(
    i: int, primal: PrimalState, dual: DualState, stats: RunStats | None = None
) -> StepOutcome:
    """One bidding interaction for source i (requires alpha_i > 0, surplus > 0).

    Pushes to the best unsaturated sink, or displaces lower-level flow at a
    saturated one, or promotes its own assignment; afterwards alpha_i is
    recomputed and the source retires (valuations demoted) if it reaches 0.
    """
    stats = stats if stats is not None else RunStats()
    stats.steps += 1
    num = dual.num
    instance = primal.instance
    best_e, best_key = _best_sink(i, primal, dual)
    if best_e is None or not num.is_pos(best_key):
        return _retire(i, primal, dual, stats)

    spec = instance.edges[best_e]
    j = spec.dst
    if primal.sink_saturated(j):
        lower = [
            e
            for e in instance.edges_of_sink(j)
            if num.is_pos(primal.flow[e]) and not num.eq(dual.valuation[e], dual.beta[j])
        ]
        assert lower, "saturated sink with no displaceable flow"
        displaced_e = min(lower, key=lambda e: instance.edges[e].src)
        i_prime = instance.edges[displaced_e].src
        if i_prime != i:
            d_spec = instance.edges[displaced_e]
            x = min(
                primal.surplus[i],
                primal.flow[displaced_e] * d_spec.price / spec.price,
            )
            primal.add_flow(best_e, x)
            dual.valuation[best_e] = dual.beta[j]
            primal.add_flow(displaced_e, -(x * spec.price / d_spec.price))
            if not num.is_pos(primal.flow[displaced_e]):
                primal.flow[displaced_e] = num.value(0)
                dual.valuation.pop(displaced_e, None)
            outcome = StepOutcome(kind="replace", sink=j, displaced=i_prime, amount=x)
            stats.replacements += 1
        else:
            dual.valuation[best_e] = dual.beta[j]
            outcome = StepOutcome(kind="promote", sink=j)
            stats.self_promotes += 1
        update_beta(j, primal, dual, stats)
    else:
        x = min(primal.surplus[i], primal.residual[j] / spec.price)
        primal.add_flow(best_e, x)
        dual.valuation[best_e] = dual.beta[j]
        outcome = StepOutcome(kind="push", sink=j, amount=x)
        stats.pushes += 1
        if primal.sink_saturated(j):
            primal.residual[j] = num.value(0)
            update_beta(j, primal, dual, stats)

    _refresh_alpha(i, primal, dual)
    if num.is_zero(dual.alpha[i]):
        for e in instance.edges_of_source(i):
            if e in dual.valuation:
                dual.valuation[e] = dual.beta_companion[instance.edges[e].dst]
    return outcome


def run(
    instance: ProblemInstance,
    config: SolverConfig,
    on_step=None,
) -> RunResult:
    """Auction rounds until no source has both positive alpha and surplus.

    Sources are scheduled round-robin among those still active.  `on_step`
    receives a read-only Snapshot after every step.  Returns non-terminated
    (partial state intact) if config.max_phases is exceeded.
    """
    primal, dual = initialize(instance, config)
    stats = RunStats()
    num = dual.num
    terminated = True
    cursor = 0
    while True:
        picked = None
        for offset in range(instance.n):
            i = (cursor + offset) % instance.n
            if num.is_pos(primal.surplus[i]) and num.is_pos(dual.alpha[i]):
                picked = i
                break
        if picked is None:
            break
        if config.max_phases is not None and stats.steps >= config.max_phases:
            terminated = False
            break
        cursor = (picked + 1) % instance.n
        auction_step(picked, primal, dual, stats)
        if on_step is not None:
            on_step(Snapshot.of(primal, dual, stats.steps))
    return RunResult(primal=primal, dual=dual, stats=stats, terminated=terminated)
