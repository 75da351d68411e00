"""Enumeration of prime chains and the chain/link-vector duality.

A prime chain is a sequence p_1, ..., p_k of primes with each
p_{j+1} = 1 (mod p_j).  Equivalently p_{j+1} = m_j * p_j + 1 for positive
integer multipliers m_j, so a chain is determined by its first element and
its multiplier vector; :func:`link_vector` and :func:`rebuild` implement
that bijection with integrity checks.

``enumerate_from`` lists all chains that start at a given prime p and obey
the growth constraint p_k <= p * x (depth-first, multipliers increasing,
output sorted lexicographically).  ``chains_ending_at`` walks the dual
direction and yields every chain whose last element is p; its cardinality
is an enumeration oracle for the tree node count f(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import CapacityError, DomainError, IntegrityError
from .pratt import PrattDag
from .sieve import SpfTable, count_primes_in_ap, is_prime_u64


@dataclass(frozen=True)
class ChainRecord:
    """An increasing chain of primes with each element = 1 modulo the one
    before it."""

    primes: tuple[int, ...]

    def __post_init__(self):
        if not self.primes:
            raise DomainError("a chain has at least one element")
        for a, b in zip(self.primes, self.primes[1:]):
            if b % a != 1:
                raise IntegrityError(f"{b} is not 1 mod {a}")

    def __len__(self) -> int:
        return len(self.primes)


@dataclass(frozen=True)
class LinkVector:
    """First chain element plus the multiplier of every link."""

    base: int
    multipliers: tuple[int, ...]


@dataclass
class ChainEnumeration:
    start: int
    ratio: float
    chains: list[ChainRecord] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.chains)

    def counts_by_length(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for c in self.chains:
            out[len(c)] = out.get(len(c), 0) + 1
        return out


def _is_prime(n: int, table: SpfTable) -> bool:
    return table.is_prime(n) if n <= table.limit else is_prime_u64(n)


def enumerate_from(
    p: int,
    x: float,
    table: SpfTable,
    bound: int = 1_000_000,
    include_trivial: bool = True,
) -> ChainEnumeration:
    """All chains p = p_1, ..., p_k with p_k <= p * x.

    Depth-first with multipliers tried in increasing order, so the chain
    list comes out sorted lexicographically.  The one-element chain [p] is
    included by default; ``include_trivial=False`` drops it from the count.
    Raises a capacity error when more than ``bound`` chains would be
    produced.
    """
    if not _is_prime(p, table):
        raise DomainError(f"{p} is not prime")
    if x < 1:
        raise DomainError("growth ratio x must be >= 1")
    ceiling = math.floor(p * x)
    result = ChainEnumeration(start=p, ratio=float(x))
    if include_trivial:
        result.chains.append(ChainRecord((p,)))

    def extend(prefix: tuple[int, ...]) -> None:
        tip = prefix[-1]
        step = tip if tip == 2 else 2 * tip
        cand = tip + 1 if tip == 2 else 2 * tip + 1
        while cand <= ceiling:
            if _is_prime(cand, table):
                chain = prefix + (cand,)
                result.chains.append(ChainRecord(chain))
                if len(result.chains) > bound:
                    raise CapacityError(f"more than {bound} chains from {p}")
                extend(chain)
            cand += step
    extend((p,))
    result.chains.sort(key=lambda c: c.primes)
    return result


def chains_ending_at(p: int, table: SpfTable, size_cap: int = 500_000) -> list[ChainRecord]:
    """Every chain whose final element is p, by explicit recursion on the
    prime divisors of predecessor candidates (no memoization)."""
    if not table.is_prime(p) or p > table.limit:
        raise DomainError(f"{p} must be a prime within the table limit")
    budget = [size_cap]

    def walk(q: int) -> list[tuple[int, ...]]:
        budget[0] -= 1
        if budget[0] < 0:
            raise CapacityError("chain enumeration size cap exceeded")
        out = [(q,)]
        if q > 2:
            for r in table.factorize(q - 1).distinct_primes():
                out.extend(c + (q,) for c in walk(r))
        return out

    return [ChainRecord(t) for t in sorted(walk(p))]


def f_oracle(p: int, table: SpfTable, size_cap: int = 500_000) -> int:
    """Tree node count of p obtained by counting chains that end at p.

    Independent of the memoized recursion: the chains are materialized one
    by one, so this is an enumeration witness, not a recurrence.
    """
    return len(chains_ending_at(p, table, size_cap))


def g_oracle(p: int, table: SpfTable, size_cap: int = 500_000) -> int:
    """Number of chains from 2 to p, counted by explicit enumeration."""
    return sum(1 for c in chains_ending_at(p, table, size_cap) if c.primes[0] == 2)


def link_vector(chain: ChainRecord | tuple[int, ...]) -> LinkVector:
    """Multiplier encoding of a chain: p_{j+1} = m_j * p_j + 1."""
    primes = chain.primes if isinstance(chain, ChainRecord) else tuple(chain)
    if not primes:
        raise DomainError("empty chain")
    mults = []
    for a, b in zip(primes, primes[1:]):
        m, r = divmod(b - 1, a)
        if r != 0 or m < 1:
            raise IntegrityError(f"{b} is not 1 mod {a}")
        mults.append(m)
    return LinkVector(primes[0], tuple(mults))


def rebuild(vector: LinkVector, table: SpfTable) -> ChainRecord:
    """Inverse of :func:`link_vector`; every reconstructed element must be
    prime or an integrity error is raised."""
    if not _is_prime(vector.base, table):
        raise IntegrityError(f"base {vector.base} is not prime")
    primes = [vector.base]
    for m in vector.multipliers:
        if m < 1:
            raise IntegrityError("multipliers must be positive")
        nxt = m * primes[-1] + 1
        if not _is_prime(nxt, table):
            raise IntegrityError(f"rebuilt element {nxt} is composite")
        primes.append(nxt)
    return ChainRecord(tuple(primes))


def n_identity_check(x: int, table: SpfTable, dag: PrattDag | None = None) -> bool:
    """Exact double count of N(x) = sum of f(p) over primes p <= x.

    Grouping chains by final element gives sum f(p); grouping by the
    second-to-last element gives pi(x) plus sum over primes q <= x/2 of
    f(q) * pi(x; q, 1).  Both sides are computed in exact integer
    arithmetic and compared.
    """
    if x < 2:
        raise DomainError("x must be >= 2")
    dag = dag or PrattDag(table)
    lhs = 0
    for arr in table.prime_arrays(2, x):
        for p in arr.tolist():
            lhs += dag.f_of(p)
    rhs = table.prime_count(x)
    for arr in table.prime_arrays(2, x // 2):
        for q in arr.tolist():
            rhs += dag.f_of(q) * count_primes_in_ap(x, q, table)
    return lhs == rhs
