"""Residue-class link series and the matrix bound on chain counts.

Fix a smoothness level y and let r be the product of all primes <= y.
For units a, b mod r the link series

    S(a, b) = sum over m >= 1 with a*m + 1 = b (mod r) of m^(-s)

collects the m-contributions of chain links that move residue a to
residue b.  Writing m0 in [1, r] for the unique solution of
a*m = b - 1 (mod r), the series is r^(-s) * zeta(s, m0/r) with the
Hurwitz zeta function, which is how entries are evaluated.

Row b of the matrix M(r, s) = (S(a, b)) sums in closed form to

    prod over p > y of (1 - p^(-s))^(-1) * prod over p | d of (p-1)/(p^s-1)

with d = gcd(b - 1, r).  Since every unit b mod r is odd, d is always
even, so the maximum row sum is (2^s - 1)^(-1) * prod_{p>y} (1-p^(-s))^(-1),
attained at any b with gcd(b - 1, r) = 2.  Whenever that maximum R is
below 1, iterating the matrix geometric series bounds the number of
chains p_1 < ... < p_k <= x * p_1 starting at any prime p_1 > y by
phi(r) * x^s / (1 - R), which ``chain_count_bound`` minimizes over an
s grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, InfeasibleError, NumericalError
from .sieve import _simple_prime_array

# Bernoulli numbers B_2, B_4, ..., B_14 for the Euler-Maclaurin tail.
_BERNOULLI = (
    1.0 / 6,
    -1.0 / 30,
    1.0 / 42,
    -1.0 / 30,
    5.0 / 66,
    -691.0 / 2730,
    7.0 / 6,
)

_MAX_MATRIX_ENTRIES = 40_000_000  # dense float64 budget (~320 MB)
_ADMISSIBLE_Y = (2, 3, 5, 7, 11, 13, 17, 19, 23)


def hurwitz_zeta(s: float, a: float | np.ndarray, tol: float = 1e-12):
    """Hurwitz zeta(s, a) = sum_{k>=0} (k + a)^(-s) for s > 1, a > 0.

    Euler-Maclaurin: a partial sum of N leading terms plus the integral
    and derivative corrections at the truncation point.  N grows until
    the first omitted correction term is below ``tol`` relative to the
    running value.  Accepts an array of a values (shared s).
    """
    if s <= 1:
        raise DomainError("hurwitz zeta implemented for s > 1 only")
    arr = np.asarray(a, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).astype(np.float64)
    if np.any(arr <= 0):
        raise DomainError("a must be positive")
    partial = np.zeros_like(arr)
    n = 0
    target = 16
    while True:
        for k in range(n, target):
            partial += (arr + k) ** (-s)
        n = target
        edge = arr + n
        total = partial + edge ** (1.0 - s) / (s - 1.0) + 0.5 * edge ** (-s)
        poch = s  # rising factorial s (s+1) ... with 2j-1 factors at depth j
        power = edge ** (-s - 1.0)
        fact = 2.0
        last_rel = np.inf
        for j, b2j in enumerate(_BERNOULLI, start=1):
            term = b2j / fact * poch * power
            total += term
            last_rel = float(np.max(np.abs(term) / np.abs(total)))
            poch *= (s + 2 * j - 1) * (s + 2 * j)
            power = power / (edge * edge)
            fact *= (2 * j + 1) * (2 * j + 2)
        if last_rel < tol:
            break
        if n >= 1 << 14:
            raise NumericalError("hurwitz zeta failed to reach tolerance")
        target = n * 2
    return float(total[0]) if scalar else total


def _primorial(y: int) -> int:
    r = 1
    for p in _simple_prime_array(y).tolist():
        r *= p
    return r


def _check_y(y: int) -> list[int]:
    if y not in _ADMISSIBLE_Y:
        raise DomainError(f"y must be one of {_ADMISSIBLE_Y}")
    return _simple_prime_array(y).tolist()


def euler_factor_tail(s: float, y: int) -> float:
    """prod over primes p > y of (1 - p^(-s))^(-1), evaluated exactly as
    zeta(s) divided by the finitely many Euler factors with p <= y."""
    primes = _check_y(y)
    value = hurwitz_zeta(s, 1.0)
    for p in primes:
        value *= 1.0 - float(p) ** (-s)
    return value


@dataclass
class ResidueMatrix:
    """Dense matrix of link series values S(a, b), rows indexed by b."""

    y: int
    s: float
    r: int
    units: np.ndarray  # the phi(r) units mod r, increasing
    entries: np.ndarray  # entries[i, j] = S(units[j], units[i])

    @property
    def dimension(self) -> int:
        return len(self.units)

    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def row_sum_closed_form(self, b: int) -> float:
        """Closed form for the row sum at unit b (see module docstring)."""
        d = math.gcd(b - 1, self.r)
        value = euler_factor_tail(self.s, self.y)
        for p in _check_y(self.y):
            if d % p == 0:
                value *= (p - 1) / (float(p) ** self.s - 1.0)
        return value


def build_matrix(y: int, s: float) -> ResidueMatrix:
    """Assemble M(r, s) for r = product of primes <= y.

    Entries share only r distinct values (the Hurwitz zetas at k/r for
    k = 1..r), which are computed once and gathered.  Dense storage, so y
    beyond 13 (dimension 5760) exceeds the entry budget and is rejected.
    """
    if s <= 1:
        raise DomainError("need s > 1 for convergence")
    primes = _check_y(y)
    r = _primorial(y)
    coprime = np.ones(r + 1, dtype=bool)
    for p in primes:
        coprime[p::p] = False
    units = np.nonzero(coprime[1 : r + 1])[0].astype(np.int64) + 1
    dim = len(units)
    if dim * dim > _MAX_MATRIX_ENTRIES:
        raise CapacityError(
            f"dense matrix for y={y} needs {dim}x{dim} entries; budget exceeded"
        )
    zvals = hurwitz_zeta(s, np.arange(1, r + 1, dtype=np.float64) / r)
    scale = float(r) ** (-s)
    inv = np.array([pow(int(a), -1, r) for a in units.tolist()], dtype=np.int64)
    entries = np.empty((dim, dim), dtype=np.float64)
    for i, b in enumerate(units.tolist()):
        m0 = (b - 1) * inv % r  # in [0, r); 0 stands for the residue r
        idx = np.where(m0 == 0, r, m0) - 1
        entries[i] = scale * zvals[idx]
    return ResidueMatrix(y=y, s=float(s), r=r, units=units, entries=entries)


def link_series_direct(a: int, b: int, y: int, s: float, terms: int = 1_000_000) -> float:
    """S(a, b) by direct summation of ``terms`` leading terms plus an
    Euler-Maclaurin tail; an independent check of the closed form."""
    primes = _check_y(y)
    r = _primorial(y)
    if math.gcd(a, r) != 1 or math.gcd(b, r) != 1:
        raise DomainError("a and b must be units mod r")
    m0 = (b - 1) * pow(a, -1, r) % r
    if m0 == 0:
        m0 = r
    m = np.arange(terms, dtype=np.float64) * r + m0
    partial = float(np.sum(m ** (-s)))
    edge = m0 + terms * r
    tail = edge ** (1.0 - s) / (r * (s - 1.0)) + 0.5 * edge ** (-s)
    tail += s * r * edge ** (-s - 1.0) / 12.0  # first derivative correction
    return partial + tail


def max_row_sum(matrix: ResidueMatrix) -> tuple[float, float]:
    """(largest directly summed row sum, closed-form maximum R(M)).

    The closed-form maximum is (2^s - 1)^(-1) * prod_{p>y} (1-p^(-s))^(-1);
    gcd(b - 1, r) is even for every unit b, so no row exceeds it.
    """
    direct = float(matrix.row_sums().max())
    closed = euler_factor_tail(matrix.s, matrix.y) / (2.0 ** matrix.s - 1.0)
    return direct, closed


def max_row_sum_value(y: int, s: float) -> float:
    """Closed-form R(M) without materializing the matrix."""
    if s <= 1:
        raise DomainError("need s > 1")
    return euler_factor_tail(s, y) / (2.0 ** s - 1.0)


def perron_eigenvalue(matrix: ResidueMatrix, tol: float = 1e-12, max_iter: int = 10_000) -> float:
    """Dominant eigenvalue of the (entrywise positive) matrix by power
    iteration with Rayleigh quotient stopping."""
    m = matrix.entries
    v = np.full(m.shape[0], 1.0 / m.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = m @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            raise NumericalError("power iteration collapsed to zero")
        w /= nw
        new_lam = float(w @ (m @ w))
        if abs(new_lam - lam) < tol:
            return new_lam
        lam = new_lam
        v = w
    raise NumericalError("power iteration did not converge")


@dataclass
class ChainCountBound:
    """Result of minimizing phi(r) * x^s / (1 - R(M(r, s))) over s."""

    x: float
    y: int
    r: int
    phi_r: int
    s_star: float
    row_sum_bound: float  # R(M) at s_star
    bound: float
    suggested_y: float  # asymptotic guidance: log x / log_2 x
    suggested_s: float  # asymptotic guidance: 1 + log_2 y / log y


def _totient_of_primorial(y: int) -> int:
    phi = 1
    for p in _check_y(y):
        phi *= p - 1
    return phi


def chain_count_bound(x: float, y: int, grid_size: int = 64) -> ChainCountBound:
    """Upper bound for the number of chains p_1 < ... < p_k <= x * p_1
    starting at any fixed prime p_1 > y.

    Scans a geometric grid of s in (1, 3], keeps the points where the
    maximum row sum R is below 1, and returns the minimizing record.  The
    asymptotically motivated parameter suggestions are reported alongside
    but never enforced.
    """
    if x < 1:
        raise DomainError("x must be >= 1")
    _check_y(y)
    r = _primorial(y)
    phi_r = _totient_of_primorial(y)
    best = None
    for delta in np.geomspace(1e-3, 2.0, grid_size):
        s = 1.0 + float(delta)
        rs = max_row_sum_value(y, s)
        if rs >= 1.0:
            continue
        val = phi_r * float(x) ** s / (1.0 - rs)
        if best is None or val < best[0]:
            best = (val, s, rs)
    if best is None:
        raise InfeasibleError(f"no s in (1, 3] contracts the matrix for y={y}")
    log2x = math.log(math.log(x)) if x > math.e else float("nan")
    sug_y = math.log(x) / log2x if x > math.e and log2x > 0 else float("nan")
    sug_s = 1.0 + math.log(math.log(y)) / math.log(y) if y > math.e else float("nan")
    return ChainCountBound(
        x=float(x),
        y=y,
        r=r,
        phi_r=phi_r,
        s_star=best[1],
        row_sum_bound=best[2],
        bound=best[0],
        suggested_y=sug_y,
        suggested_s=sug_s,
    )
