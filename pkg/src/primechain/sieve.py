"""Segmented smallest-prime-factor sieve and factorization helpers.

The central object is :class:`SpfTable`: smallest-prime-factor values for
every integer in ``2..limit``, materialized segment by segment so each
working block stays cache resident.  Primes are the cells whose smallest
prime factor equals the integer itself; internally those cells store 0 so
a freshly zeroed segment needs one marking pass only.

Everything downstream (Pratt trees, chain enumeration, totient iterates,
singular series) factorizes through this table.  Integers above the table
limit fall back to a deterministic Miller-Rabin test that is exact for all
64-bit inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError

DEFAULT_SEGMENT_WIDTH = 1 << 20
MAX_LIMIT = (1 << 32) - 1

# Deterministic Miller-Rabin witness set, exact for n < 3.3*10^24 and in
# particular for every 64-bit integer.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime_u64(n: int) -> bool:
    """Deterministic primality test for 0 <= n < 2**64."""
    if n < 0:
        raise DomainError("primality test needs n >= 0")
    if n >= 1 << 64:
        raise CapacityError("witness set only proves primality below 2**64")
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _simple_prime_array(n: int) -> np.ndarray:
    """Primes <= n by a plain boolean sieve (used for base primes only)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.nonzero(flags)[0].astype(np.int64)


@dataclass(frozen=True)
class Factorization:
    """Prime factorization of a positive integer as (prime, exponent) pairs
    in increasing prime order."""

    n: int
    pairs: tuple[tuple[int, int], ...]

    def distinct_primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    def largest_prime_factor(self) -> int:
        """P+(n); by convention P+(1) = 1."""
        return self.pairs[-1][0] if self.pairs else 1

    def totient(self) -> int:
        phi = 1
        for p, e in self.pairs:
            phi *= (p - 1) * p ** (e - 1)
        return phi

    def radical(self) -> int:
        rad = 1
        for p, _ in self.pairs:
            rad *= p
        return rad

    def unitary_cofactor(self) -> int:
        """l(n): the product of p^(e-1) over p^e || n, i.e. n / rad(n)."""
        val = 1
        for p, e in self.pairs:
            val *= p ** (e - 1)
        return val


class SpfTable:
    """Smallest-prime-factor values for 2..limit, stored per segment.

    Cells holding 0 denote primes (their smallest prime factor is the
    number itself).  ``segment_width`` must be a power of two so indexing
    is a shift and a mask.
    """

    def __init__(self, limit: int, segment_width: int = DEFAULT_SEGMENT_WIDTH):
        if limit < 2:
            raise DomainError("table limit must be at least 2")
        if limit > MAX_LIMIT:
            raise CapacityError(f"table limit {limit} exceeds 32-bit ceiling {MAX_LIMIT}")
        if segment_width < 1 << 10 or segment_width & (segment_width - 1):
            raise DomainError("segment width must be a power of two >= 1024")
        self.limit = int(limit)
        self.segment_width = int(segment_width)
        self._shift = segment_width.bit_length() - 1
        self._mask = segment_width - 1
        self._base = _simple_prime_array(math.isqrt(limit))
        self.segments: list[np.ndarray] = []
        for lo in range(0, limit + 1, segment_width):
            hi = min(lo + segment_width, limit + 1)
            self.segments.append(self._build_segment(lo, hi))

    def _build_segment(self, lo: int, hi: int) -> np.ndarray:
        seg = np.zeros(hi - lo, dtype=np.uint32)
        for p in self._base:
            p = int(p)
            start = max(2 * p, ((lo + p - 1) // p) * p)
            if start >= hi:
                continue
            sl = seg[start - lo :: p]
            sl[sl == 0] = p
        if lo == 0:
            seg[:2] = 1  # 0 and 1 are out of domain; poison the cells
        return seg

    # -- scalar queries -------------------------------------------------

    def spf(self, n: int) -> int:
        """Smallest prime factor of n (2 <= n <= limit)."""
        if not 2 <= n <= self.limit:
            raise DomainError(f"n={n} outside table range 2..{self.limit}")
        v = int(self.segments[n >> self._shift][n & self._mask])
        return n if v == 0 else v

    def is_prime(self, n: int) -> bool:
        """Primality for any 64-bit n; table lookup below the limit,
        deterministic Miller-Rabin above it."""
        if n < 2:
            return False
        if n <= self.limit:
            return self.segments[n >> self._shift][n & self._mask] == 0
        if n >= 1 << 64:
            raise CapacityError("primality queries limited to 64-bit integers")
        return is_prime_u64(n)

    def factorize(self, n: int) -> Factorization:
        """Factorization of 1 <= n <= limit via repeated spf division."""
        if not 1 <= n <= self.limit:
            raise DomainError(f"n={n} outside factorization range 1..{self.limit}")
        m = n
        pairs = []
        while m > 1:
            p = self.spf(m)
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
        return Factorization(n, tuple(pairs))

    # -- vectorized queries ---------------------------------------------

    def is_prime_array(self, ns: np.ndarray) -> np.ndarray:
        """Boolean primality mask for an int array with entries <= limit."""
        ns = np.asarray(ns, dtype=np.int64)
        if ns.size and (ns.min() < 0 or ns.max() > self.limit):
            raise DomainError("array entries outside table range")
        out = np.zeros(ns.shape, dtype=bool)
        seg_ids = ns >> self._shift
        for s in np.unique(seg_ids):
            mask = seg_ids == s
            vals = self.segments[s][ns[mask] & self._mask]
            out[mask] = vals == 0
        out[ns < 2] = False
        return out

    def prime_arrays(self, lo: int = 2, hi: int | None = None):
        """Yield primes in [lo, hi] as one int64 array per segment."""
        hi = self.limit if hi is None else min(hi, self.limit)
        if lo < 2:
            lo = 2
        w = self.segment_width
        for si, seg in enumerate(self.segments):
            base = si * w
            if base > hi or base + len(seg) <= lo:
                continue
            idx = np.nonzero(seg == 0)[0] + base
            idx = idx[(idx >= lo) & (idx <= hi)]
            if idx.size:
                yield idx.astype(np.int64)

    def primes(self, lo: int = 2, hi: int | None = None) -> np.ndarray:
        chunks = list(self.prime_arrays(lo, hi))
        if not chunks:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(chunks)

    def prime_count(self, x: int) -> int:
        """pi(x) for 0 <= x <= limit."""
        if x > self.limit:
            raise DomainError(f"x={x} beyond table limit {self.limit}")
        total = 0
        for arr in self.prime_arrays(2, x):
            total += arr.size
        return total


def build_spf(limit: int, segment_width: int = DEFAULT_SEGMENT_WIDTH) -> SpfTable:
    """Construct the smallest-prime-factor table for 2..limit."""
    return SpfTable(limit, segment_width)


def count_primes_in_ap(x: int, q: int, table: SpfTable) -> int:
    """Number of primes p <= x with p = 1 (mod q).

    q = 1 degenerates to pi(x).  Candidates 1 + mq are tested against the
    table (or Miller-Rabin above its limit), so x may exceed the table
    limit as long as it stays within 64 bits.
    """
    if q < 1:
        raise DomainError("modulus q must be >= 1")
    if x < 2:
        return 0
    if q == 1:
        return table.prime_count(x)
    first = 1 + q
    if first > x:
        return 0
    ns = np.arange(first, x + 1, q, dtype=np.int64)
    if x <= table.limit:
        return int(table.is_prime_array(ns).sum())
    below = ns[ns <= table.limit]
    above = ns[ns > table.limit]
    total = int(table.is_prime_array(below).sum()) if below.size else 0
    total += sum(1 for n in above.tolist() if is_prime_u64(n))
    return total


def l_value(n: int, table: SpfTable) -> int:
    """l(n) = product of p^(e-1) over prime powers p^e exactly dividing n.

    Multiplicative, l(1) = 1, and l(n) * rad(n) = n.
    """
    if n < 1:
        raise DomainError("l(n) defined for n >= 1")
    return table.factorize(n).unitary_cofactor()
