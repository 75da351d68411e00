import math

import numpy as np
import pytest

from primechain import sieve
from primechain.errors import CapacityError, DomainError


def naive_primes(n):
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags)


def naive_spf(n):
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


class TestMillerRabin:
    def test_matches_sieve_to_1e4(self):
        flags = np.zeros(10_001, dtype=bool)
        flags[naive_primes(10_000)] = True
        for n in range(10_001):
            assert sieve.is_prime_u64(n) == bool(flags[n]), n

    def test_known_large_primes(self):
        assert sieve.is_prime_u64((1 << 61) - 1)  # Mersenne
        assert sieve.is_prime_u64(2_147_483_647)
        assert sieve.is_prime_u64(18_446_744_073_709_551_557)  # largest < 2^64

    def test_known_composites_and_pseudoprimes(self):
        # Carmichael numbers and strong pseudoprimes to small bases.
        for n in (561, 1105, 41041, 3215031751, 3825123056546413051):
            assert not sieve.is_prime_u64(n), n
        assert not sieve.is_prime_u64((1 << 61) - 3)

    def test_range_guard(self):
        with pytest.raises(DomainError):
            sieve.is_prime_u64(-1)
        with pytest.raises(CapacityError):
            sieve.is_prime_u64(1 << 64)


class TestSpfTable:
    def test_spf_matches_trial_division(self):
        t = sieve.build_spf(5000, segment_width=1024)
        for n in range(2, 5001):
            assert t.spf(n) == naive_spf(n), n

    def test_segment_boundaries(self):
        # Width 1024 forces several segments; check primality across joins.
        t = sieve.build_spf(10_000, segment_width=1024)
        ref = set(naive_primes(10_000).tolist())
        for n in range(2, 10_001):
            assert t.is_prime(n) == (n in ref), n

    def test_is_prime_array_matches_scalar(self, table):
        ns = np.arange(2, 40_000, dtype=np.int64)
        vec = table.is_prime_array(ns)
        for n, v in zip(ns[:2000].tolist(), vec[:2000].tolist()):
            assert table.is_prime(n) == v
        assert int(vec.sum()) == table.prime_count(39_999)

    def test_prime_count_checkpoints(self, table):
        assert table.prime_count(10) == 4
        assert table.prime_count(100) == 25
        assert table.prime_count(10_000) == 1229
        assert table.prime_count(100_000) == 9592
        assert table.prime_count(1_000_000) == 78498

    def test_primes_slice(self, table):
        ps = table.primes(90, 120)
        assert ps.tolist() == [97, 101, 103, 107, 109, 113]

    def test_limit_guards(self):
        with pytest.raises(DomainError):
            sieve.SpfTable(1)
        with pytest.raises(CapacityError):
            sieve.SpfTable(1 << 32)
        with pytest.raises(DomainError):
            sieve.SpfTable(100, segment_width=1000)


class TestFactorization:
    def test_roundtrip_product(self, table):
        for n in range(1, 3000):
            fac = table.factorize(n)
            prod = 1
            for p, e in fac.pairs:
                prod *= p**e
            assert prod == n

    def test_totient_radical_cofactor(self, table):
        for n in range(1, 2000):
            fac = table.factorize(n)
            phi = sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)
            assert fac.totient() == phi, n
            rad = 1
            for p in fac.distinct_primes():
                rad *= p
            assert fac.radical() == rad
            assert fac.unitary_cofactor() * rad == n

    def test_l_value_fixed_points(self, table):
        # l(n) = n / rad(n): squarefree n give 1, prime powers give p^(e-1).
        assert sieve.l_value(1, table) == 1
        assert sieve.l_value(12, table) == 2
        assert sieve.l_value(8, table) == 4
        assert sieve.l_value(30, table) == 1
        assert sieve.l_value(720, table) == 24
        with pytest.raises(DomainError):
            sieve.l_value(0, table)

    def test_largest_prime_factor(self, table):
        assert table.factorize(97).largest_prime_factor() == 97
        assert table.factorize(96).largest_prime_factor() == 3
        assert table.factorize(1).largest_prime_factor() == 1


class TestPrimesInProgression:
    def test_degenerate_modulus(self, table):
        assert sieve.count_primes_in_ap(1_000, 1, table) == 168

    def test_against_direct_loop(self, table):
        for q in (2, 3, 4, 6, 10):
            want = sum(
                1 for p in naive_primes(20_000).tolist() if p % q == 1
            )
            assert sieve.count_primes_in_ap(20_000, q, table) == want, q

    def test_beyond_table_limit(self):
        small = sieve.build_spf(1000)
        # x above the table limit falls back to Miller-Rabin per candidate.
        want = sum(1 for p in naive_primes(5000).tolist() if p % 7 == 1)
        assert sieve.count_primes_in_ap(5000, 7, small) == want

    def test_guards(self, table):
        assert sieve.count_primes_in_ap(1, 3, table) == 0
        with pytest.raises(DomainError):
            sieve.count_primes_in_ap(100, 0, table)
