"""Primal flow state and dual price state shared by both auction solvers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .instance import ProblemInstance, SolverConfig


class Numerics:
    """Comparison policy: exact Fractions (tol 0) or float64 with tolerance."""

    def __init__(self, exact: bool = True, tol: float = 0.0):
        self.exact = exact
        self.tol = Fraction(0) if exact else tol

    def value(self, x) -> Fraction | float:
        return Fraction(x) if self.exact else float(x)

    def eq(self, a, b) -> bool:
        return a == b if self.exact else abs(a - b) <= self.tol

    def le(self, a, b) -> bool:
        return a <= b if self.exact else a - b <= self.tol

    def is_zero(self, a) -> bool:
        return a == 0 if self.exact else abs(a) <= self.tol

    def is_pos(self, a) -> bool:
        return a > 0 if self.exact else a > self.tol

    @staticmethod
    def for_config(config: SolverConfig) -> "Numerics":
        if config.numeric_mode == "exact":
            return Numerics(exact=True)
        return Numerics(exact=False, tol=config.float_tol)


class PrimalState:
    """Per-edge flow plus incrementally maintained surpluses and budget residuals.

    surplus[i]  = a_i - sum of flow out of source i
    residual[j] = b_j - price-weighted flow into sink j
    Both always equal their defining sums; recompute_check verifies that.
    """

    def __init__(self, instance: ProblemInstance, num: Numerics):
        self.instance = instance
        self.num = num
        self.flow = [num.value(0) for _ in instance.edges]
        self.surplus = [num.value(a) for a in instance.supply]
        self.residual = [num.value(b) for b in instance.budget]

    def add_flow(self, e: int, delta) -> None:
        spec = self.instance.edges[e]
        self.flow[e] += delta
        self.surplus[spec.src] -= delta
        self.residual[spec.dst] -= delta * spec.price

    def sink_saturated(self, j: int) -> bool:
        return self.num.is_zero(self.residual[j])

    def edge_saturated(self, e: int) -> bool:
        cap = self.instance.edges[e].capacity
        return cap is not None and self.num.eq(self.flow[e], self.num.value(cap))

    def forward_residual(self, e: int):
        """Remaining edge capacity; None means unbounded."""
        cap = self.instance.edges[e].capacity
        if cap is None:
            return None
        return self.num.value(cap) - self.flow[e]

    def primal_value(self):
        return sum(
            (spec.profit * f for spec, f in zip(self.instance.edges, self.flow)),
            start=self.num.value(0),
        )

    def recompute_check(self) -> bool:
        """Surpluses/residuals match their defining sums (exact-mode oracle)."""
        for i in range(self.instance.n):
            out = sum(self.flow[e] for e in self.instance.edges_of_source(i))
            if not self.num.eq(self.surplus[i], self.num.value(self.instance.supply[i]) - out):
                return False
        for j in range(self.instance.m):
            paid = sum(
                self.flow[e] * self.instance.edges[e].price
                for e in self.instance.edges_of_sink(j)
            )
            if not self.num.eq(self.residual[j], self.num.value(self.instance.budget[j]) - paid):
                return False
        return True


class DualState:
    """Source prices alpha, sink prices beta with companion level, edge valuations.

    beta_companion[j] holds the previous beta_j, which equals
    beta_j / (1 + epsilon) whenever it is positive.  valuation[e] records the
    sink price level at which the flow on edge e was last assigned; it exists
    only while the edge carries flow.
    """

    def __init__(self, instance: ProblemInstance, config: SolverConfig, num: Numerics):
        self.instance = instance
        self.num = num
        self.epsilon = num.value(config.epsilon)
        self.alpha = [
            num.value(max((s.profit for s in instance.edges if s.src == i), default=0))
            for i in range(instance.n)
        ]
        self.beta = [num.value(0) for _ in range(instance.m)]
        self.beta_companion = [num.value(0) for _ in range(instance.m)]
        self.valuation: dict[int, Fraction | float] = {}

    def raise_beta(self, j: int, new_value) -> None:
        self.beta_companion[j] = self.beta[j]
        self.beta[j] = new_value

    def effective_profit(self, e: int):
        spec = self.instance.edges[e]
        return self.num.value(spec.profit) - spec.price * self.beta[spec.dst]

    def dual_value(self, gammas: dict[int, Fraction | float] | None = None):
        total = sum(
            (a * al for a, al in zip(self.instance.supply, self.alpha)),
            start=self.num.value(0),
        )
        total += sum(b * be for b, be in zip(self.instance.budget, self.beta))
        if gammas:
            for e, g in gammas.items():
                cap = self.instance.edges[e].capacity
                if cap is not None:
                    total += cap * g
        return total


def make_states(
    instance: ProblemInstance, config: SolverConfig
) -> tuple[PrimalState, DualState, Numerics]:
    """Zero flow, zero sink prices, alpha_i = best profit out of i: both feasible."""
    num = Numerics.for_config(config)
    return PrimalState(instance, num), DualState(instance, config, num), num


@dataclass(frozen=True)
class Snapshot:
    """Read-only copy of solver state handed to between-iteration monitors."""

    flow: tuple
    alpha: tuple
    beta: tuple
    beta_companion: tuple
    valuation: tuple
    iteration: int

    @staticmethod
    def of(primal: PrimalState, dual: DualState, iteration: int) -> "Snapshot":
        return Snapshot(
            flow=tuple(primal.flow),
            alpha=tuple(dual.alpha),
            beta=tuple(dual.beta),
            beta_companion=tuple(dual.beta_companion),
            valuation=tuple(sorted(dual.valuation.items())),
            iteration=iteration,
        )
