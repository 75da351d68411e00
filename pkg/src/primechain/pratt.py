"""Pratt trees: recursive certificate trees of primes.

The tree of a prime p has root p and one child subtree for each distinct
prime q dividing p - 1; the tree of 2 is a single node.  Because children
of p are primes smaller than p, the trees of all primes up to a bound form
a DAG that we memoize per prime:

* ``f_of(p)``  - number of nodes (counted with multiplicity),
* ``h_of(p)``  - height, with the single node 2 having height 1,
* ``g_of(p)``  - number of root-to-2 descending label chains, which for
  odd p is exactly f(p) / 2,
* ``level_counts(p)`` - nodes per depth level, built by convolving the
  children's (memoized) level profiles shifted one level down.

The module also carries the exact product identities on the label multiset
Q(p) of the tree (every label q contributes q/(q-1) * l(q-1), and the full
product telescopes to p), iterated-totient statistics, and the greedy
chain 2, 3, 7, 29, ... in which each prime is the least prime = 1 modulo
its predecessor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError
from .sieve import SpfTable, is_prime_u64

_LINNIK_VALUE_CAP = 1 << 63


class PrattDag:
    """Memoized per-prime tree attributes, built bottom-up on demand."""

    def __init__(self, table: SpfTable):
        self.table = table
        self._children: dict[int, tuple[int, ...]] = {2: ()}
        self._f: dict[int, int] = {2: 1}
        self._h: dict[int, int] = {2: 1}
        self._g: dict[int, int] = {2: 1}
        self._profiles: dict[int, tuple[int, ...]] = {2: (1,)}

    def _require_prime(self, p: int) -> None:
        if not self.table.is_prime(p):
            raise DomainError(f"{p} is not prime")
        if p > self.table.limit:
            raise DomainError(f"{p} beyond factorization limit {self.table.limit}")

    def children(self, p: int) -> tuple[int, ...]:
        """Distinct primes dividing p - 1 (deduplicated, increasing)."""
        got = self._children.get(p)
        if got is not None:
            return got
        self._require_prime(p)
        self._build(p)
        return self._children[p]

    def _build(self, p: int) -> None:
        # Iterative post-order so deep chains never hit the recursion limit.
        stack = [p]
        while stack:
            q = stack[-1]
            ch = self._children.get(q)
            if ch is None:
                ch = self.table.factorize(q - 1).distinct_primes()
                self._children[q] = ch
            pending = [c for c in ch if c not in self._f]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            if q in self._f:
                continue
            self._f[q] = 1 + sum(self._f[c] for c in ch)
            self._h[q] = 1 + max(self._h[c] for c in ch)
            self._g[q] = sum(self._g[c] for c in ch)

    def f_of(self, p: int) -> int:
        if p not in self._f:
            self._require_prime(p)
            self._build(p)
        return self._f[p]

    def h_of(self, p: int) -> int:
        if p not in self._h:
            self._require_prime(p)
            self._build(p)
        return self._h[p]

    def g_of(self, p: int) -> int:
        if p not in self._g:
            self._require_prime(p)
            self._build(p)
        return self._g[p]

    def level_counts(self, p: int) -> list[int]:
        """Number of tree nodes at each depth; length h(p), entries sum to f(p)."""
        prof = self._profiles.get(p)
        if prof is None:
            self.f_of(p)  # ensures children memoized for the whole subtree
            order = self._topo_order(p)
            for q in order:
                if q in self._profiles:
                    continue
                parts = [self._profiles[c] for c in self._children[q]]
                depth = 1 + max(len(t) for t in parts)
                counts = [0] * depth
                counts[0] = 1
                for t in parts:
                    for i, c in enumerate(t):
                        counts[i + 1] += c
                self._profiles[q] = tuple(counts)
            prof = self._profiles[p]
        return list(prof)

    def _topo_order(self, p: int) -> list[int]:
        order: list[int] = []
        seen: set[int] = set()
        stack = [(p, False)]
        while stack:
            q, done = stack.pop()
            if done:
                order.append(q)
                continue
            if q in seen:
                continue
            seen.add(q)
            stack.append((q, True))
            for c in self._children[q]:
                if c not in seen:
                    stack.append((c, False))
        return order


def f_of(p: int, dag: PrattDag) -> int:
    """Node count of the tree of p: f(2) = 1, f(p) = 1 + sum over distinct
    primes q | p-1 of f(q)."""
    return dag.f_of(p)


def h_of(p: int, dag: PrattDag) -> int:
    """Tree height: h(2) = 1, h(p) = 1 + max over children."""
    return dag.h_of(p)


def g_of(p: int, dag: PrattDag) -> int:
    """Number of descending label chains from the root to a leaf labelled 2;
    equals f(p) / 2 for every odd prime p."""
    return dag.g_of(p)


def level_counts(p: int, dag: PrattDag) -> list[int]:
    return dag.level_counts(p)


def is_fermat_prime(p: int) -> bool:
    """True when p = 2^(2^m) + 1 for some m >= 0, i.e. the tree of p has
    height exactly 2 (all of p - 1's prime mass is on 2)."""
    if p < 3:
        return False
    e = (p - 1).bit_length() - 1
    if (1 << e) != p - 1:
        return False
    return e >= 1 and e & (e - 1) == 0 and is_prime_u64(p)


@dataclass
class RangeStats:
    """Aggregate tree statistics over all primes p <= limit."""

    limit: int
    prime_count: int
    h_hist: dict[int, int]
    f_hist: dict[int, int]
    n_total: int  # sum of f(p) over p <= limit
    max_h: int
    max_h_prime: int
    max_f: int
    max_f_prime: int

    def rows(self, stat: str) -> list[tuple[str, int, int]]:
        if stat not in ("H", "f"):
            raise DomainError("stat must be 'H' or 'f'")
        hist = self.h_hist if stat == "H" else self.f_hist
        return [(stat, value, hist[value]) for value in sorted(hist)]


def range_stats(x: int, table: SpfTable, dag: PrattDag | None = None) -> RangeStats:
    """Histograms of f and h over primes <= x, plus N(x) = sum of f(p).

    Primes are visited in increasing order, so every child value is already
    memoized when its parent is reached.
    """
    if x < 2:
        raise DomainError("x must be >= 2")
    if x > table.limit:
        raise DomainError(f"x={x} beyond table limit {table.limit}")
    dag = dag or PrattDag(table)
    f_map, h_map, g_map, ch_map = dag._f, dag._h, dag._g, dag._children
    h_hist: dict[int, int] = {}
    f_hist: dict[int, int] = {}
    n_total = 0
    count = 0
    max_h = max_f = 0
    max_h_prime = max_f_prime = 2
    factorize = table.factorize
    for arr in table.prime_arrays(2, x):
        for p in arr.tolist():
            if p == 2:
                ch: tuple[int, ...] = ()
                f = h = 1
                g = 1
            else:
                ch = factorize(p - 1).distinct_primes()
                f = 1
                h = 0
                g = 0
                for c in ch:
                    f += f_map[c]
                    hc = h_map[c]
                    if hc > h:
                        h = hc
                    g += g_map[c]
                h += 1
            ch_map[p] = ch
            f_map[p] = f
            h_map[p] = h
            g_map[p] = g
            h_hist[h] = h_hist.get(h, 0) + 1
            f_hist[f] = f_hist.get(f, 0) + 1
            n_total += f
            count += 1
            if h > max_h:
                max_h, max_h_prime = h, p
            if f > max_f:
                max_f, max_f_prime = f, p
    return RangeStats(
        limit=x,
        prime_count=count,
        h_hist=h_hist,
        f_hist=f_hist,
        n_total=n_total,
        max_h=max_h,
        max_h_prime=max_h_prime,
        max_f=max_f,
        max_f_prime=max_f_prime,
    )


class MassProducts:
    """Exact integer products over the label multiset Q(p) of the tree.

    For each prime p the multiset Q(p) consists of p together with the
    labels of all child subtrees.  Memoized bottom-up:

    * ``den(p)``  = product of (q - 1) over Q(p),
    * ``num(p)``  = product of q * l(q - 1) over Q(p),
    * ``lprod(p)`` = product of l(q - 1) over Q(p).

    The identity num(p) == p * den(p) is the exact-arithmetic form of
    "the tree mass product telescopes to p", and lprod(p)^2 * 2^f(p) <= p^2
    is the exact form of the 2^(-f/2) mass decay bound.
    """

    def __init__(self, table: SpfTable, dag: PrattDag):
        self.table = table
        self.dag = dag
        self._den: dict[int, int] = {2: 1}
        self._num: dict[int, int] = {2: 2}
        self._lprod: dict[int, int] = {2: 1}

    def _ensure(self, p: int) -> None:
        if p in self._den:
            return
        self.dag.f_of(p)
        for q in self.dag._topo_order(p):
            if q in self._den:
                continue
            lq = self.table.factorize(q - 1).unitary_cofactor()
            den = q - 1
            num = q * lq
            lp = lq
            for c in self.dag._children[q]:
                den *= self._den[c]
                num *= self._num[c]
                lp *= self._lprod[c]
            self._den[q] = den
            self._num[q] = num
            self._lprod[q] = lp

    def den(self, p: int) -> int:
        self._ensure(p)
        return self._den[p]

    def num(self, p: int) -> int:
        self._ensure(p)
        return self._num[p]

    def lprod(self, p: int) -> int:
        self._ensure(p)
        return self._lprod[p]

    def mass_identity_holds(self, p: int) -> bool:
        self._ensure(p)
        return self._num[p] == p * self._den[p]


def phi_iterate(n: int, k: int, table: SpfTable) -> int:
    """k-fold iterate of Euler's totient; phi_0(n) = n and phi(1) = 1."""
    if n < 1 or k < 0:
        raise DomainError("need n >= 1 and k >= 0")
    for _ in range(k):
        if n == 1:
            return 1
        n = table.factorize(n).totient()
    return n


def phi_iter_stats(x: int, k: int, eps: float, table: SpfTable) -> float:
    """Fraction of n <= x whose k-th totient iterate is x^eps-smooth.

    Smoothness means the largest prime factor of phi_k(n) is <= x^eps,
    with P+(1) = 1.  Computed exhaustively with full totient and
    largest-prime-factor tables up to x.
    """
    if x < 2 or x > table.limit:
        raise DomainError("x must be in 2..table limit")
    if k < 0 or not 0 < eps <= 1:
        raise DomainError("need k >= 0 and 0 < eps <= 1")
    phi = np.arange(x + 1, dtype=np.int64)
    gpf = np.ones(x + 1, dtype=np.int64)
    for arr in table.prime_arrays(2, x):
        for p in arr.tolist():
            phi[p::p] -= phi[p::p] // p
            gpf[p::p] = p
    vals = np.arange(1, x + 1, dtype=np.int64)
    for _ in range(k):
        vals = phi[vals]
    threshold = float(x) ** eps
    return float(np.mean(gpf[vals] <= threshold))


def linnik_chain(length: int, table: SpfTable) -> list[int]:
    """Greedy chain starting at 2 where each next element is the least
    prime congruent to 1 modulo the current one."""
    if length < 1:
        raise DomainError("length must be >= 1")
    chain = [2]
    while len(chain) < length:
        q = chain[-1]
        step = q if q == 2 else 2 * q  # odd q forces even multipliers
        cand = q + 1 if q == 2 else 2 * q + 1
        while True:
            if cand >= _LINNIK_VALUE_CAP:
                raise CapacityError("chain value exceeds 63-bit guard")
            if cand <= table.limit:
                if table.is_prime(cand):
                    break
            elif is_prime_u64(cand):
                break
            cand += step
        chain.append(cand)
    return chain
