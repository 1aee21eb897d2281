"""Directed residual structure: preferred edges, back edges, best-sink heaps.

Forward arcs are each source's preferred edge (best effective profit among
unsaturated edges); reverse arcs are back edges, i.e. positive-flow edges
assigned below the sink's current price level that may also be pulled back.
Paths and cycles for the production solver are walked here.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum

from .instance import ProblemInstance
from .state import DualState, PrimalState


class PathKind(Enum):
    TYPE_I = "path"          # ends at an alpha=0 source or an unsaturated sink
    TYPE_II = "two-cycle"    # ends where the preferred edge is the sole back edge
    TYPE_III = "cycle"       # a source or sink repeated
    STALLED = "stalled"      # saturated sink with no back edge: price must rise


@dataclass
class Path:
    """Alternating walk; steps are ('fwd'|'back', edge index) between verts."""

    kind: PathKind
    verts: list[tuple[str, int]]
    steps: list[tuple[str, int]]
    endpoint: tuple[str, int] | None = None
    two_cycle_edge: int | None = None
    stalled_sink: int | None = None
    cycle_start: int | None = None

    def split_cycle(self) -> tuple[list[tuple[str, int]], list[tuple[int, int]]]:
        """Decompose a TYPE_III walk into prefix steps and (forward, back) pairs.

        The prefix ends at the cycle's entry source; if the repeated vertex is
        a sink the cycle is rotated so it starts at the following source.
        """
        if self.kind is not PathKind.TYPE_III:
            raise ValueError("split_cycle applies to cycle walks only")
        q = self.cycle_start
        if self.verts[q][0] == "src":
            prefix = self.steps[:q]
            cycle_steps = self.steps[q:]
        else:
            prefix = self.steps[: q + 1]
            cycle_steps = self.steps[q + 1 :] + [self.steps[q]]
        assert len(cycle_steps) % 2 == 0
        pairs = []
        for z in range(0, len(cycle_steps), 2):
            fwd_kind, fwd = cycle_steps[z]
            back_kind, back = cycle_steps[z + 1]
            assert fwd_kind == "fwd" and back_kind == "back"
            pairs.append((fwd, back))
        return prefix, pairs


class DerivedGraph:
    """Owns the heaps, preferred edges and lazy alpha refresh for one run."""

    def __init__(
        self,
        instance: ProblemInstance,
        primal: PrimalState,
        dual: DualState,
        counters: dict[str, int] | None = None,
        debug: bool = False,
    ):
        self.instance = instance
        self.primal = primal
        self.dual = dual
        self.num = dual.num
        self.counters = counters if counters is not None else {}
        self.debug = debug
        self.event_log: list[str] = []
        self.preferred: list[int | None] = [None] * instance.n
        self._heaps: list[list] = [[] for _ in range(instance.n)]
        self._saturated = [primal.edge_saturated(e) for e in range(len(instance.edges))]
        self._dirty: set[int] = set(range(instance.n))
        self._b_cache: dict[int, set[int]] = {}
        for e, spec in enumerate(instance.edges):
            if not self._saturated[e]:
                self._push_entry(e)
        for i in range(instance.n):
            self.ensure_fresh(i)
        self.remove_two_cycles_all()

    # -- heap bookkeeping ---------------------------------------------------

    def _count(self, key: str, amount: int = 1) -> None:
        self.counters[key] = self.counters.get(key, 0) + amount

    def _push_entry(self, e: int) -> None:
        spec = self.instance.edges[e]
        key = self.dual.effective_profit(e)
        heapq.heappush(self._heaps[spec.src], (-key, spec.dst, e, key))
        self._count("heap_updates")

    def note_beta_changed(self, j: int) -> None:
        """Refresh heap keys of j's unsaturated in-edges after a price change."""
        for e in self.instance.edges_of_sink(j):
            if not self._saturated[e]:
                self._push_entry(e)
            self._dirty.add(self.instance.edges[e].src)
        if self.debug:
            self.event_log.append(f"beta-rise j={j + 1} value={self.dual.beta[j]}")
            self._log_b_transitions(j)

    def note_flow_changed(self, e: int) -> None:
        """Track saturation flips; saturated edges leave the heap, others rejoin."""
        now = self.primal.edge_saturated(e)
        spec = self.instance.edges[e]
        if now != self._saturated[e]:
            self._saturated[e] = now
            if not now:
                self._push_entry(e)
            self._dirty.add(spec.src)
        if self.debug:
            self._log_b_transitions(spec.dst)

    def ensure_fresh(self, i: int) -> None:
        if i in self._dirty:
            self.rebuild_preferred(i)

    # -- graph operations -------------------------------------------------------

    def rebuild_preferred(self, i: int) -> int | None:
        """Re-pick source i's preferred edge from the heap top and refresh alpha.

        Stale entries (saturated edge, or key no longer current) are discarded
        lazily.  Ties already break toward the lowest sink index through the
        heap ordering.  Returns None when i has no unsaturated edge left.
        """
        heap = self._heaps[i]
        zero = self.num.value(0)
        while heap:
            neg_key, dst, e, key = heap[0]
            if self._saturated[e] or not self.num.eq(self.dual.effective_profit(e), key):
                heapq.heappop(heap)
                self._count("heap_updates")
                continue
            self.preferred[i] = e
            self.dual.alpha[i] = key if self.num.is_pos(key) else zero
            self._dirty.discard(i)
            return e
        self.preferred[i] = None
        self.dual.alpha[i] = zero
        self._dirty.discard(i)
        return None

    def back_edges(self, j: int) -> list[int]:
        """Positive-flow in-edges of j assigned below beta_j that may give flow back.

        A saturated edge qualifies only once its price slack c - p*beta - alpha
        has dropped to zero or below; until then its implicit edge dual covers it.
        """
        result = []
        beta_j = self.dual.beta[j]
        for e in self.instance.edges_of_sink(j):
            if not self.num.is_pos(self.primal.flow[e]):
                continue
            y = self.dual.valuation.get(e)
            if y is None or not self.num.is_pos(beta_j - y):
                continue
            if self._saturated[e]:
                spec = self.instance.edges[e]
                self.ensure_fresh(spec.src)
                slack = self.dual.effective_profit(e) - self.dual.alpha[spec.src]
                if self.num.is_pos(slack):
                    continue
            result.append(e)
        result.sort(key=lambda e: (self.instance.edges[e].src, e))
        return result

    def fix_two_cycle(self, i: int) -> bool:
        """Promote the preferred edge out of the back set when siblings remain.

        With several back edges at the sink, a preferred edge that is also a
        back edge would form a two-step loop; raising its valuation to beta
        removes it while leaving the sink's price unchanged.  The lone back
        edge case is kept, since removing it would enable a price rise.
        """
        e = self.preferred[i]
        if e is None or not self.num.is_pos(self.dual.alpha[i]):
            # only live bidders re-assign at the current price level
            return False
        j = self.instance.edges[e].dst
        back = self.back_edges(j)
        if e in back and len(back) > 1:
            self.dual.valuation[e] = self.dual.beta[j]
            if self.debug:
                self._log_b_transitions(j)
            return True
        return False

    def remove_two_cycles_all(self) -> None:
        for i in range(self.instance.n):
            self.ensure_fresh(i)
            self.fix_two_cycle(i)

    def find_path(self, start: int) -> Path:
        """Walk preferred and back edges from `start` until a stop condition.

        Stops at: a source with alpha 0, a sink with beta 0, a repeated vertex
        (cycle), the sole-back-edge loop, or a saturated sink with no back edge
        at all (price rise pending).  The walk revisits within n+m steps, so
        its length never exceeds 2(n+m)+1.
        """
        verts: list[tuple[str, int]] = []
        steps: list[tuple[str, int]] = []
        src_pos: dict[int, int] = {}
        snk_pos: dict[int, int] = {}
        limit = 2 * (self.instance.n + self.instance.m) + 1
        i = start
        while True:
            if len(verts) > limit:
                raise RuntimeError("derived-graph walk exceeded its length bound")
            self._count("walk_steps")
            self.ensure_fresh(i)
            if verts and self.num.is_zero(self.dual.alpha[i]):
                verts.append(("src", i))
                return Path(PathKind.TYPE_I, verts, steps, endpoint=("src", i))
            self.fix_two_cycle(i)
            e = self.preferred[i]
            assert e is not None, "active source without a preferred edge"
            src_pos[i] = len(verts)
            verts.append(("src", i))
            steps.append(("fwd", e))
            j = self.instance.edges[e].dst
            if j in snk_pos:
                return Path(PathKind.TYPE_III, verts, steps, cycle_start=snk_pos[j])
            if self.num.is_zero(self.dual.beta[j]):
                verts.append(("snk", j))
                return Path(PathKind.TYPE_I, verts, steps, endpoint=("snk", j))
            snk_pos[j] = len(verts)
            verts.append(("snk", j))
            back = self.back_edges(j)
            if e in back:
                # after two-cycle preprocessing this is the sink's sole back edge
                return Path(PathKind.TYPE_II, verts, steps, two_cycle_edge=e)
            if not back:
                return Path(PathKind.STALLED, verts, steps, stalled_sink=j)
            b = back[0]
            steps.append(("back", b))
            nxt = self.instance.edges[b].src
            if nxt in src_pos:
                return Path(PathKind.TYPE_III, verts, steps, cycle_start=src_pos[nxt])
            i = nxt

    # -- debug event log -------------------------------------------------------

    def _log_b_transitions(self, j: int) -> None:
        current = set(self.back_edges(j))
        previous = self._b_cache.get(j, set())
        for e in sorted(current - previous):
            self.event_log.append(f"back-enter e={e} j={j + 1} beta={self.dual.beta[j]}")
        for e in sorted(previous - current):
            zeroed = not self.num.is_pos(self.primal.flow[e])
            word = "back-zero" if zeroed else "back-leave"
            self.event_log.append(f"{word} e={e} j={j + 1} beta={self.dual.beta[j]}")
        self._b_cache[j] = current


def rebuild_preferred(graph: DerivedGraph, i: int) -> int | None:
    return graph.rebuild_preferred(i)


def remove_two_cycles(graph: DerivedGraph) -> DerivedGraph:
    graph.remove_two_cycles_all()
    return graph


def find_path(graph: DerivedGraph, start: int) -> Path:
    return graph.find_path(start)
