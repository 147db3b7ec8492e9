"""A small conflict-driven clause-learning engine.

Literals are nonzero ints (``v`` / ``-v``).  The engine is incremental:
clauses can be added between calls and each call may carry assumptions.
Learned clauses only depend on permanent clauses, so they survive calls.
Everything is deterministic: no randomness, ties broken by variable index.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Sequence


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Engine:
    def __init__(self, nvars: int = 0):
        self.nvars = 0
        self.value: list[int] = [0]  # per var: 1 true, -1 false, 0 unassigned
        self.level: list[int] = [0]
        self.reason: list[list[int] | None] = [None]
        self.activity: list[float] = [0.0]
        self.polarity: list[int] = [0]
        self.watches: dict[int, list[list[int]]] = {}
        self.clauses: list[list[int]] = []
        self.learnts: list[list[int]] = []
        self.lbd: dict[int, int] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.ok = True
        self.heap: list[tuple[float, int]] = []
        self.var_inc = 1.0
        self.max_learnts = 4000
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.model: list[int] = []
        self.new_vars(nvars)

    # -- setup -----------------------------------------------------------

    def new_vars(self, count: int) -> None:
        for _ in range(count):
            self.nvars += 1
            v = self.nvars
            self.value.append(0)
            self.level.append(0)
            self.reason.append(None)
            self.activity.append(0.0)
            self.polarity.append(-1)
            self.watches[v] = []
            self.watches[-v] = []
            heapq.heappush(self.heap, (0.0, v))

    def set_polarity(self, var: int, positive: bool) -> None:
        self.polarity[var] = 1 if positive else -1

    def _lit_value(self, lit: int) -> int:
        v = self.value[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a permanent clause.  Returns False once the formula is trivially UNSAT."""
        if not self.ok:
            return False
        if self.trail_lim:
            self._cancel_until(0)
        seen = set()
        clause = []
        for lit in lits:
            if -lit in seen:
                return True  # tautology
            if lit in seen:
                continue
            val = self._lit_value(lit)
            if val == 1 and self.level[abs(lit)] == 0:
                return True
            if val == -1 and self.level[abs(lit)] == 0:
                continue
            seen.add(lit)
            clause.append(lit)
        if not clause:
            self.ok = False
            return False
        if len(clause) == 1:
            self._assign(clause[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        self.clauses.append(clause)
        self.watches[-clause[0]].append(clause)
        self.watches[-clause[1]].append(clause)
        return True

    # -- core ------------------------------------------------------------

    def _assign(self, lit: int, reason) -> None:
        v = lit if lit > 0 else -lit
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self):
        """Unit propagation; returns a conflicting clause or None.

        ``watches[-l]`` holds clauses watching literal ``l``; they are visited
        when ``l`` becomes false, i.e. when ``-l`` is assigned.
        """
        value = self.value
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = -p
            ws = watches[p]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                fv = value[first] if first > 0 else -value[-first]
                if fv == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = value[lk] if lk > 0 else -value[-lk]
                    if lv != -1:
                        c[1], c[k] = lk, false_lit
                        watches[-lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if fv == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self.qhead = len(trail)
                        return c
                    self._assign(first, c)
            del ws[j:]
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for k in range(1, self.nvars + 1):
                self.activity[k] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[k], k) for k in range(1, self.nvars + 1) if self.value[k] == 0]
            heapq.heapify(self.heap)
        elif self.value[v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: list[int]) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        clause = confl
        while True:
            for q in clause:
                if q == p:
                    continue
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = abs(p)
            seen.discard(v)
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[v]
        learnt[0] = -p
        # drop literals implied by the rest of the clause (local minimization)
        keep = [learnt[0]]
        marks = {abs(q) for q in learnt[1:]}
        for q in learnt[1:]:
            r = self.reason[abs(q)]
            if r is None or any(abs(x) not in marks and self.level[abs(x)] > 0 for x in r if x != -q):
                keep.append(q)
        learnt = keep
        if len(learnt) == 1:
            back = 0
        else:
            best = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
            learnt[1], learnt[best] = learnt[best], learnt[1]
            back = self.level[abs(learnt[1])]
        self.var_inc /= 0.95
        return learnt, back

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for k in range(len(self.trail) - 1, stop - 1, -1):
            lit = self.trail[k]
            v = abs(lit)
            self.polarity[v] = 1 if lit > 0 else -1
            self.value[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        heap = self.heap
        while heap:
            act, v = heapq.heappop(heap)
            if self.value[v] == 0 and -act == self.activity[v]:
                return v
        for v in range(1, self.nvars + 1):
            if self.value[v] == 0:
                return v
        return 0

    def _reduce_db(self) -> None:
        locked = {id(self.reason[abs(l)]) for l in self.trail if self.reason[abs(l)] is not None}
        cand = sorted(
            (c for c in self.learnts if len(c) > 2 and id(c) not in locked),
            key=lambda c: (-self.lbd.get(id(c), 99), -len(c)),
        )
        drop = {id(c) for c in cand[: len(cand) // 2]}
        if not drop:
            return
        self.learnts = [c for c in self.learnts if id(c) not in drop]
        for ids in drop:
            self.lbd.pop(ids, None)
        for lit, ws in self.watches.items():
            ws[:] = [c for c in ws if id(c) not in drop]

    def solve(self, assumptions: Sequence[int] = (), conflict_budget: int | None = None) -> bool | None:
        """Return True (model in ``self.model``), False, or None when the budget runs out."""
        self.model = []
        if not self.ok:
            return False
        self._cancel_until(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        restart = 0
        budget_left = conflict_budget
        while True:
            limit = 100 * _luby(restart)
            restart += 1
            status = self._search(limit, assumptions)
            if status is not None:
                self._cancel_until(0)
                return status
            if budget_left is not None:
                budget_left -= limit
                if budget_left <= 0:
                    self._cancel_until(0)
                    return None

    def _search(self, limit: int, assumptions: Sequence[int]) -> bool | None:
        local = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                local += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._assign(learnt[0], None)
                else:
                    self.learnts.append(learnt)
                    self.lbd[id(learnt)] = len({self.level[abs(q)] for q in learnt})
                    self.watches[-learnt[0]].append(learnt)
                    self.watches[-learnt[1]].append(learnt)
                    self._assign(learnt[0], learnt)
                continue
            if local >= limit:
                self._cancel_until(0)
                return None
            if len(self.learnts) - len(self.trail) >= self.max_learnts:
                self._reduce_db()
                self.max_learnts = int(self.max_learnts * 1.1)
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                a = assumptions[lvl]
                val = self._lit_value(a)
                if val == -1:
                    return False
                self.trail_lim.append(len(self.trail))
                if val == 0:
                    self._assign(a, None)
                continue
            v = self._pick()
            if v == 0:
                self.model = list(self.value)
                return True
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self._assign(v if self.polarity[v] > 0 else -v, None)
