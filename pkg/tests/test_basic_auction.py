from fractions import Fraction

import pytest

from budget_flow.basic_auction import auction_step, initialize, run, update_beta
from budget_flow.certify import certify
from budget_flow.instance import SolverConfig, generate
from conftest import btp, bts

EPS4 = SolverConfig(epsilon=Fraction(1, 4))


def test_initialize_plain(one_by_one):
    primal, dual = initialize(one_by_one, EPS4)
    assert dual.alpha == [3]
    assert dual.beta == [0]
    assert primal.flow == [0]


def test_initialize_alpha_is_best_profit():
    inst = btp([5], [9, 9], [(0, 0, 2, 1), (0, 1, 7, 3)])
    _, dual = initialize(inst, EPS4)
    assert dual.alpha == [7]


def test_initialize_zero_profit_source_starts_retired():
    inst = btp([5], [9], [(0, 0, 0, 1)])
    result = run(inst, EPS4)
    assert result.stats.steps == 0
    assert result.primal.primal_value() == 0


def test_initialize_rejects_capacitated():
    inst = bts([5], [10], [(0, 0, 3, 2, 4)])
    with pytest.raises(ValueError):
        initialize(inst, EPS4)


def test_update_beta_initializes_to_min_rate():
    # rates 10/2 and 6/3; epsilon 1/10 -> beta = 2/10
    inst = btp([4, 4], [12], [(0, 0, 10, 2), (1, 0, 6, 3)])
    primal, dual = initialize(inst, SolverConfig(epsilon=Fraction(1, 10)))
    primal.add_flow(0, Fraction(6))  # price 12: saturated
    outcome = update_beta(0, primal, dual)
    assert outcome == "init"
    assert dual.beta[0] == Fraction(1, 5)


def test_update_beta_rises_when_all_at_top():
    inst = btp([4], [12], [(0, 0, 10, 2)])
    primal, dual = initialize(inst, SolverConfig(epsilon=Fraction(1, 10)))
    primal.add_flow(0, Fraction(6))
    dual.beta[0] = Fraction(1, 5)
    dual.valuation[0] = Fraction(1, 5)
    assert update_beta(0, primal, dual) == "rise"
    assert dual.beta_companion[0] == Fraction(1, 5)
    assert dual.beta[0] == Fraction(11, 50)


def test_update_beta_no_change_with_lower_level_flow():
    inst = btp([4, 4], [24], [(0, 0, 10, 2), (1, 0, 6, 3)])
    primal, dual = initialize(inst, SolverConfig(epsilon=Fraction(1, 10)))
    primal.add_flow(0, Fraction(6))
    primal.add_flow(1, Fraction(4))
    dual.beta[0] = Fraction(11, 50)
    dual.beta_companion[0] = Fraction(1, 5)
    dual.valuation[0] = Fraction(11, 50)
    dual.valuation[1] = Fraction(1, 5)  # still at the companion level
    assert update_beta(0, primal, dual) == "none"
    assert dual.beta[0] == Fraction(11, 50)


def test_auction_step_unsaturated_push(one_by_one):
    primal, dual = initialize(one_by_one, EPS4)
    outcome = auction_step(0, primal, dual)
    assert outcome.kind == "push"
    assert outcome.amount == 5  # min(5, 10/2)
    assert primal.flow[0] == 5
    assert primal.surplus[0] == 0


def test_auction_step_replacement_trace():
    # saturated sink held by source 1 at the companion level: f=4 at price 1;
    # bidder 0 with price 2 and surplus 1 takes min(1, 4*1/2) = 1 and the
    # displaced flow drops by 1*2/1 = 2.
    inst = btp([1, 9], [4], [(0, 0, 9, 2), (1, 0, 3, 1)])
    primal, dual = initialize(inst, EPS4)
    primal.add_flow(1, Fraction(4))  # price 4 = budget: saturated
    dual.beta[0] = Fraction(1, 2)
    dual.beta_companion[0] = Fraction(2, 5)
    dual.valuation[1] = Fraction(2, 5)
    outcome = auction_step(0, primal, dual)
    assert outcome.kind == "replace"
    assert outcome.displaced == 1
    assert outcome.amount == 1
    assert primal.flow[0] == 1
    assert primal.flow[1] == 2
    # sink stays exactly saturated
    assert primal.residual[0] == 0


def test_auction_step_self_promote():
    inst = btp([9], [4], [(0, 0, 3, 1)])
    primal, dual = initialize(inst, EPS4)
    primal.add_flow(0, Fraction(4))
    dual.beta[0] = Fraction(1, 2)
    dual.beta_companion[0] = Fraction(2, 5)
    dual.valuation[0] = Fraction(2, 5)
    outcome = auction_step(0, primal, dual)
    assert outcome.kind == "promote"
    # promoting the sole flow lets beta rise; the valuation ages to companion
    assert dual.beta[0] == Fraction(5, 8)
    assert dual.valuation[0] == dual.beta_companion[0] == Fraction(1, 2)
    assert primal.flow[0] == 4


def test_run_one_by_one(one_by_one):
    result = run(one_by_one, EPS4)
    assert result.terminated
    cert = certify(
        one_by_one,
        list(result.primal.flow),
        list(result.dual.alpha),
        list(result.dual.beta),
        Fraction(1, 4),
    )
    assert cert.primal_value == 15
    assert cert.passed
    assert cert.gap_ratio == 0


def test_run_reaches_factor_of_opt(two_sources_one_sink):
    result = run(two_sources_one_sink, EPS4)
    assert result.terminated
    value = result.primal.primal_value()
    assert value >= Fraction(3, 4) * 25


def test_run_all_zero_profit():
    inst = btp([3, 3], [5], [(0, 0, 0, 1), (1, 0, 0, 2)])
    result = run(inst, EPS4)
    assert result.stats.steps == 0
    assert result.primal.primal_value() == 0


def test_run_abort_contract_on_shrinking_displacement_cycle():
    # displacement loops with transfer ratio < 1 shrink forever; the step cap
    # must abort cleanly with the partial state flagged
    inst = generate(seed=10, n=5, m=6, density=0.7)
    result = run(inst, SolverConfig(epsilon=Fraction(1, 4), max_phases=2000))
    assert not result.terminated
    assert result.stats.steps == 2000
    assert result.primal.recompute_check()


def test_per_step_invariants_hold():
    eps = Fraction(1, 4)
    config = SolverConfig(epsilon=eps, max_phases=4000)
    checked = 0
    for seed in (0, 3, 7, 12, 21):
        try:
            inst = generate(seed=seed, n=1 + seed % 4, m=1 + seed % 3, density=0.9)
        except ValueError:
            continue

        snapshots = []
        result = run(inst, config, on_step=snapshots.append)
        if not result.terminated:
            continue
        checked += 1
        last_beta = [Fraction(0)] * inst.m
        for snap in snapshots:
            # primal feasibility
            for i in range(inst.n):
                assert sum(snap.flow[e] for e in inst.edges_of_source(i)) <= inst.supply[i]
            paid = [Fraction(0)] * inst.m
            for e, spec in enumerate(inst.edges):
                assert snap.flow[e] >= 0
                paid[spec.dst] += spec.price * snap.flow[e]
            for j in range(inst.m):
                assert paid[j] <= inst.budget[j]
                # unsaturated sinks keep price zero; beta never decreases
                if paid[j] < inst.budget[j]:
                    assert snap.beta[j] == 0
                assert snap.beta[j] >= last_beta[j]
            last_beta = list(snap.beta)
            # companion tracks the previous level exactly
            for j in range(inst.m):
                if snap.beta_companion[j] > 0:
                    assert snap.beta[j] == snap.beta_companion[j] * (1 + eps)
            # dual feasibility and the approximate flow condition
            for e, spec in enumerate(inst.edges):
                key = spec.profit - spec.price * snap.beta[spec.dst]
                assert snap.alpha[spec.src] >= key
                if snap.flow[e] > 0:
                    assert snap.alpha[spec.src] <= key + eps * spec.profit
            # valuations sit on one of the two active levels
            valuation = dict(snap.valuation)
            for e, spec in enumerate(inst.edges):
                if snap.flow[e] > 0:
                    assert valuation[e] <= snap.beta[spec.dst]
    assert checked >= 3


def test_stats_exported_as_plain_mapping(one_by_one):
    result = run(one_by_one, EPS4)
    exported = result.stats.to_dict()
    assert isinstance(exported, dict)
    assert all(isinstance(v, int) for v in exported.values())
    assert exported["pushes"] >= 1
