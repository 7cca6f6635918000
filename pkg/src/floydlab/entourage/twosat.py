"""2-SAT over side assignments via strongly connected components.

Literal ``i`` (``0 <= i < n``) means "variable i is true", literal ``n + i``
means "variable i is false".
"""
from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = ["TwoSat"]


class TwoSat:
    def __init__(self, n: int):
        self.n = int(n)
        self._src: list[np.ndarray] = []
        self._dst: list[np.ndarray] = []
        self._graph = None
        self._sat = None

    def lit(self, var, value: bool):
        var = np.asarray(var, dtype=np.int64)
        return var if value else var + self.n

    def neg(self, lit):
        lit = np.asarray(lit, dtype=np.int64)
        return np.where(lit < self.n, lit + self.n, lit - self.n)

    def add_clauses(self, p, q):
        """Add clauses ``p OR q`` for arrays of literals."""
        p = np.atleast_1d(np.asarray(p, dtype=np.int64))
        q = np.atleast_1d(np.asarray(q, dtype=np.int64))
        # not p -> q, not q -> p
        self._src += [self.neg(p), self.neg(q)]
        self._dst += [q, p]
        self._graph = None
        self._sat = None

    @property
    def graph(self) -> sparse.csr_matrix:
        if self._graph is None:
            m = 2 * self.n
            if self._src:
                s = np.concatenate(self._src)
                d = np.concatenate(self._dst)
            else:
                s = d = np.zeros(0, np.int64)
            g = sparse.csr_matrix((np.ones(s.size, np.int8), (s, d)), shape=(m, m))
            g.sum_duplicates()
            self._graph = g
        return self._graph

    def satisfiable(self) -> bool:
        if self._sat is None:
            ncomp, lab = csgraph.connected_components(self.graph, directed=True,
                                                      connection="strong")
            self._sat = not np.any(lab[: self.n] == lab[self.n:])
        return self._sat

    def reachable(self, lit: int) -> np.ndarray:
        order = csgraph.breadth_first_order(self.graph, int(lit), directed=True,
                                            return_predecessors=False)
        mask = np.zeros(2 * self.n, bool)
        mask[order] = True
        return mask

    def can_hold(self, lit: int) -> bool:
        """Whether some satisfying assignment makes ``lit`` true."""
        if not self.satisfiable():
            return False
        return not self.reachable(lit)[int(self.neg(lit))]
