"""Shared builders: tiny instances, synthetic cycle states, reference simulators."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from budget_flow.derived_graph import DerivedGraph
from budget_flow.instance import EdgeSpec, Kind, ProblemInstance, SolverConfig
from budget_flow.solver import RunStats
from budget_flow.state import make_states


def btp(supply, budget, edges) -> ProblemInstance:
    return ProblemInstance(
        kind=Kind.BTP,
        supply=tuple(supply),
        budget=tuple(budget),
        edges=tuple(EdgeSpec(*e) for e in edges),
    )


def bts(supply, budget, edges) -> ProblemInstance:
    return ProblemInstance(
        kind=Kind.BTS,
        supply=tuple(supply),
        budget=tuple(budget),
        edges=tuple(EdgeSpec(*e) for e in edges),
    )


@pytest.fixture
def one_by_one() -> ProblemInstance:
    # single edge: supply 5, budget 10, profit 3, price 2
    return btp([5], [10], [(0, 0, 3, 2)])


@pytest.fixture
def two_sources_one_sink() -> ProblemInstance:
    # optimum 25 at flow (0, 5)
    return btp([10, 10], [10], [(0, 0, 2, 1), (1, 0, 5, 2)])


def build_cycle_state(prices_fwd, prices_back, back_flows, surplus, caps_fwd=None):
    """Synthetic alternating cycle: k sources, k sinks, fwd[z]=(i_z,j_z), back[z]=(i_{z+1},j_z).

    Returns (instance, primal, dual, graph, stats, pairs).  Supplies and
    budgets are large so only edge capacities and back-edge flows bind.
    """
    k = len(prices_fwd)
    caps_fwd = caps_fwd or [None] * k
    edges = []
    pairs = []
    for z in range(k):
        fwd_idx = len(edges)
        edges.append(EdgeSpec(z, z, 10**6, prices_fwd[z], capacity=caps_fwd[z]))
        back_idx = len(edges)
        edges.append(EdgeSpec((z + 1) % k, z, 10**6, prices_back[z], capacity=None))
        pairs.append((fwd_idx, back_idx))
    instance = ProblemInstance(
        kind=Kind.BTS,
        supply=tuple([10**9] * k),
        budget=tuple([10**9] * k),
        edges=tuple(edges),
    )
    primal, dual, num = make_states(instance, SolverConfig(epsilon=Fraction(1, 4)))
    for z in range(k):
        primal.add_flow(pairs[z][1], Fraction(back_flows[z]))
    # entry surplus is whatever remains at source 0 minus the requested value
    entry = 0
    primal.surplus[entry] = Fraction(surplus)
    for z in range(k):
        dual.beta[z] = Fraction(1)
        dual.valuation[pairs[z][1]] = Fraction(1, 2)
    stats = RunStats()
    graph = DerivedGraph(instance, primal, dual, counters=stats.counts)
    return instance, primal, dual, graph, stats, pairs


def simulate_revolutions(instance, flows, pairs, surplus, revolutions):
    """Reference cycle push: move flow edge by edge, one revolution at a time.

    No clamping; the caller guarantees the revolution count is admissible.
    Returns (flows after, carry arriving back at the entry source).
    """
    out = list(flows)
    carry = Fraction(surplus)
    for _ in range(revolutions):
        x = carry
        for fwd, back in pairs:
            out[fwd] += x
            x = x * instance.edges[fwd].price / instance.edges[back].price
            out[back] -= x
        carry = x
    return out, carry


def random_simple_cycle(rng: random.Random):
    """Random synthetic cycle state with 2..4 pairs."""
    k = rng.randint(2, 4)
    prices_fwd = [rng.randint(1, 6) for _ in range(k)]
    prices_back = [rng.randint(1, 6) for _ in range(k)]
    back_flows = [Fraction(rng.randint(1, 40), rng.randint(1, 4)) for _ in range(k)]
    surplus = Fraction(rng.randint(1, 30), rng.randint(1, 3))
    caps_fwd = [
        rng.randint(1, 60) if rng.random() < 0.5 else None for _ in range(k)
    ]
    return build_cycle_state(prices_fwd, prices_back, back_flows, surplus, caps_fwd)
