"""Singular series for the linear form systems attached to multiplier
vectors.

A multiplier vector (m_1, ..., m_{k-1}) generates forms

    f_1(n) = n,    f_{j+1}(n) = m_j * f_j(n) + 1,

so f_j(n) = a_j n + b_j with a_1 = 1, b_1 = 0, a_j = m_1 ... m_{j-1} and
b_j = 1 + sum over i in 2..j-1 of m_i ... m_{j-1}.  The density constant
for "n and all f_j(n) simultaneously prime" is

    S = prod over primes p of (1 - xi(p)/p) * (1 - 1/p)^(-k),

where xi(p) counts n in [0, p) with p dividing the product of the forms.
``xi`` performs the O(p * k) residue scan directly.  For primes not
dividing the discriminant-like integer

    N = m_1 ... m_{k-1} * prod over i < j of |a_i b_j - a_j b_i|

every form has exactly one root mod p and the roots are pairwise distinct,
so xi(p) = k; this makes the infinite product computable: exact factors
for p <= P (scan for divisors of N, the k-form factor otherwise) and a
rigorously bounded tail interval for p > P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError
from .sieve import SpfTable, _simple_prime_array

_COEFF_CAP = 1 << 63


@dataclass(frozen=True)
class FormSystem:
    """Linear forms a_j n + b_j produced by a multiplier vector."""

    multipliers: tuple[int, ...]
    a: tuple[int, ...]
    b: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.a)


def forms_from_links(multipliers: tuple[int, ...] | list[int]) -> FormSystem:
    """Coefficients of the form system for a multiplier vector.

    Multipliers must be nonnegative; zeros are admitted so exhaustive
    residue scans over full multiplier boxes can reuse this constructor.
    A prime can divide both a_j and b_j (multipliers (7, 6) already do it
    at j = 3), in which case that form vanishes identically mod p and the
    attached singular series is exactly zero.
    """
    ms = tuple(int(m) for m in multipliers)
    if any(m < 0 for m in ms):
        raise DomainError("multipliers must be nonnegative")
    a = [1]
    b = [0]
    for m in ms:
        na = a[-1] * m
        nb = b[-1] * m + 1
        if na >= _COEFF_CAP or nb >= _COEFF_CAP:
            raise CapacityError("form coefficients exceed 63-bit guard")
        a.append(na)
        b.append(nb)
    return FormSystem(ms, tuple(a), tuple(b))


def xi(p: int, system: FormSystem) -> int:
    """Number of residues n mod p at which some form vanishes mod p.

    Direct scan of all p residues.  Each nondegenerate form contributes
    at most one root, so 1 <= xi(p) <= min(k, p) whenever no form is
    identically zero mod p; a degenerate form (p dividing both its
    coefficients) forces xi(p) = p instead.
    """
    if p < 2:
        raise DomainError("p must be a prime >= 2")
    n = np.arange(p, dtype=np.int64)
    prod = np.ones(p, dtype=np.int64)
    for aj, bj in zip(system.a, system.b):
        prod = prod * ((aj % p) * n + bj % p) % p
    return int(np.count_nonzero(prod == 0))


def _xi_batch(p: int, a_rows: np.ndarray, b_rows: np.ndarray) -> np.ndarray:
    """xi(p) for many form systems at once; rows are coefficient vectors."""
    n = np.arange(p, dtype=np.int64)
    prod = np.ones((a_rows.shape[0], p), dtype=np.int64)
    for j in range(a_rows.shape[1]):
        aj = a_rows[:, j] % p
        bj = b_rows[:, j] % p
        prod = prod * (aj[:, None] * n[None, :] + bj[:, None]) % p
    return (prod == 0).sum(axis=1)


def discriminant_product(system: FormSystem) -> int:
    """N = m_1 ... m_{k-1} * prod_{i<j} |a_i b_j - a_j b_i| (exact integer).

    A prime divides N exactly when some form degenerates mod p or two
    forms share a root mod p; away from N, xi(p) = k.
    """
    if any(m == 0 for m in system.multipliers):
        raise DomainError("discriminant product needs positive multipliers")
    val = 1
    for m in system.multipliers:
        val *= m
    k = system.k
    for i in range(k):
        for j in range(i + 1, k):
            det = abs(system.a[i] * system.b[j] - system.a[j] * system.b[i])
            val *= det
    return val


@dataclass(frozen=True)
class SingularValue:
    """Singular series value with a rigorous tail interval.

    ``value`` multiplies exact local factors for p <= prime_cutoff by the
    nominal tail 1; the true value lies in [lower, upper].
    """

    value: float
    lower: float
    upper: float
    prime_cutoff: int
    k: int


def singular_series(
    multipliers: tuple[int, ...] | list[int],
    prime_cutoff: int = 1_000_000,
    table: SpfTable | None = None,
) -> SingularValue:
    """Evaluate S for a positive multiplier vector.

    Local factors at primes dividing N (and at nothing else) can deviate
    from the generic (1 - k/p)(1 - 1/p)^(-k) shape, so those primes get
    the direct residue scan.  The product over the remaining p <= P uses
    the generic factor; the p > P tail is bracketed by
    exp(+-tau) with tau bounding |log prod (1 - k/p)(1 - 1/p)^(-k)|.

    Returns 0 (exactly) when some prime has xi(p) = p, which happens iff
    some residue class is fully obstructed.
    """
    ms = tuple(int(m) for m in multipliers)
    if any(m < 1 for m in ms):
        raise DomainError("singular series needs multipliers >= 1")
    if prime_cutoff < 100:
        raise DomainError("prime cutoff must be >= 100")
    system = forms_from_links(ms)
    k = system.k
    bigN = discriminant_product(system)

    if table is not None and table.limit >= prime_cutoff:
        primes = table.primes(2, prime_cutoff)
    else:
        primes = _simple_prime_array(prime_cutoff)

    # Primes whose local factor needs the direct scan: divisors of N.
    special = []
    residue = bigN
    for p in primes.tolist():
        if residue % p == 0:
            special.append(p)
            while residue % p == 0:
                residue //= p
    # residue > 1 now only has prime factors beyond the cutoff; their xi
    # is unknown (1..k), handled by widening the tail interval below.
    unknown_big_primes = 0
    if residue > 1:
        unknown_big_primes = int(math.log(residue) / math.log(prime_cutoff)) + 1

    log_exact = 0.0
    for p in special:
        x = xi(p, system)
        if x == p:
            return SingularValue(0.0, 0.0, 0.0, prime_cutoff, k)
        log_exact += math.log1p(-x / p) - k * math.log1p(-1.0 / p)

    special_set = set(special)
    generic = np.array([p for p in primes.tolist() if p not in special_set], dtype=np.float64)
    # A generic prime carries k distinct roots, so p <= k forces xi(p) = p
    # (possible only when p = k) and the whole product vanishes.
    if generic.size and float(generic.min()) <= k:
        return SingularValue(0.0, 0.0, 0.0, prime_cutoff, k)
    log_exact += float(np.sum(np.log1p(-k / generic) - k * np.log1p(-1.0 / generic)))
    value = math.exp(log_exact)

    # |log((1 - k/p)(1 - 1/p)^(-k))| <= k^2 / (2 p^2) * 1 / (1 - (k+1)/p)
    # for p > k + 1; summing p > P against sum n^(-2) <= 1/P gives tau.
    P = float(prime_cutoff)
    tau = (k * k) / (2.0 * P) / (1.0 - (k + 1) / P)
    # Each unfactored prime q > P contributes a factor inside
    # [(1 - k/q), (1 - 1/q)^(-k)], widened to the worst case at q = P.
    widen_low = (1.0 - k / P) ** unknown_big_primes
    widen_high = (1.0 - 1.0 / P) ** (-k * unknown_big_primes)
    return SingularValue(
        value=value,
        lower=value * math.exp(-tau) * widen_low,
        upper=value * math.exp(tau) * widen_high,
        prime_cutoff=prime_cutoff,
        k=k,
    )


def rhopm_check(p: int, k: int, free: tuple[int, ...], fixed: dict[int, int] | None = None) -> bool:
    """Exhaustive residue-count inequality over a multiplier box.

    Multiplier indices in ``free`` (1-based, in 1..k-1) range over all of
    [0, p); the rest are pinned by ``fixed`` (defaulting to 1).  The check
    asserts

        sum over the box of xi(p, m)  >=  p^(F+1) - (p-1)^(F+1)

    with F = len(free), by direct enumeration in exact integers.
    """
    if p < 2 or k < 1:
        raise DomainError("need p >= 2 and k >= 1")
    fixed = dict(fixed or {})
    free = tuple(sorted(set(free)))
    if any(not 1 <= i <= k - 1 for i in free):
        raise DomainError("free indices must lie in 1..k-1")
    if any(not 1 <= i <= k - 1 for i in fixed):
        raise DomainError("fixed indices must lie in 1..k-1")
    if set(free) & set(fixed):
        raise DomainError("an index cannot be both free and fixed")
    f_count = len(free)
    if p ** f_count > 2_000_000:
        raise CapacityError("multiplier box too large to enumerate")

    base = [fixed.get(i, 1) for i in range(1, k)]
    combos = p ** f_count
    rows = np.tile(np.array(base, dtype=np.int64), (combos, 1)) if k > 1 else np.zeros((1, 0), dtype=np.int64)
    for pos, idx in enumerate(free):
        period = p ** (f_count - pos - 1)
        col = (np.arange(combos) // period) % p
        rows[:, idx - 1] = col

    # Coefficient rows: a_j and b_j per combo, built by the same recursion.
    a_rows = np.ones((max(combos, 1), k), dtype=np.int64)
    b_rows = np.zeros((max(combos, 1), k), dtype=np.int64)
    for j in range(1, k):
        m = rows[:, j - 1]
        a_rows[:, j] = a_rows[:, j - 1] * m
        b_rows[:, j] = b_rows[:, j - 1] * m + 1

    total = int(_xi_batch(p, a_rows, b_rows).sum())
    target = p ** (f_count + 1) - (p - 1) ** (f_count + 1)
    return total >= target


def rhopm_total(p: int, k: int, free: tuple[int, ...], fixed: dict[int, int] | None = None) -> tuple[int, int]:
    """(sum of xi over the box, lower bound) for inspection and tests."""
    fixed = dict(fixed or {})
    free = tuple(sorted(set(free)))
    f_count = len(free)
    base = [fixed.get(i, 1) for i in range(1, k)]
    combos = p ** f_count
    rows = np.tile(np.array(base, dtype=np.int64), (combos, 1)) if k > 1 else np.zeros((1, 0), dtype=np.int64)
    for pos, idx in enumerate(free):
        period = p ** (f_count - pos - 1)
        col = (np.arange(combos) // period) % p
        rows[:, idx - 1] = col
    a_rows = np.ones((max(combos, 1), k), dtype=np.int64)
    b_rows = np.zeros((max(combos, 1), k), dtype=np.int64)
    for j in range(1, k):
        m = rows[:, j - 1]
        a_rows[:, j] = a_rows[:, j - 1] * m
        b_rows[:, j] = b_rows[:, j - 1] * m + 1
    total = int(_xi_batch(p, a_rows, b_rows).sum())
    target = p ** (f_count + 1) - (p - 1) ** (f_count + 1)
    return total, target
