import math

import numpy as np
import pytest

from primechain import singular
from primechain.errors import CapacityError, DomainError

# High-precision value of 2 * prod_{p>2} (1 - 1/(p-1)^2), the density
# constant shared by the one-link system (n, 2n+1).
TWIN_CONSTANT = 1.3203236316937390


def xi_by_scan(p, system):
    count = 0
    for n in range(p):
        prod = 1
        for a, b in zip(system.a, system.b):
            prod = prod * ((a * n + b) % p) % p
        if prod == 0:
            count += 1
    return count


class TestFormSystem:
    def test_coefficient_recursion(self):
        sys = singular.forms_from_links((2, 4))
        assert sys.k == 3
        assert sys.a == (1, 2, 8)
        assert sys.b == (0, 1, 5)

    def test_single_form(self):
        sys = singular.forms_from_links(())
        assert sys.k == 1
        assert sys.a == (1,) and sys.b == (0,)

    def test_zero_multiplier_admitted(self):
        # Residue-box scans range multipliers over [0, p), so the
        # constructor accepts zeros; only negatives are rejected.
        sys = singular.forms_from_links((0, 2))
        assert sys.a == (1, 0, 0) and sys.b == (0, 1, 3)
        with pytest.raises(DomainError):
            singular.forms_from_links((-1, 2))


class TestXi:
    def test_hand_counts_one_link(self):
        sys = singular.forms_from_links((2,))
        assert singular.xi(2, sys) == 1
        assert singular.xi(3, sys) == 2
        assert singular.xi(5, sys) == 2

    def test_matches_scan(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            k = int(rng.integers(1, 5))
            ms = tuple(int(m) for m in rng.integers(1, 9, size=k - 1))
            sys = singular.forms_from_links(ms)
            for p in (2, 3, 5, 7, 11, 13):
                assert singular.xi(p, sys) == xi_by_scan(p, sys), (p, ms)

    def test_range(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            k = int(rng.integers(1, 6))
            ms = tuple(int(m) for m in rng.integers(1, 20, size=k - 1))
            sys = singular.forms_from_links(ms)
            for p in (2, 3, 5, 7, 11):
                x = singular.xi(p, sys)
                degenerate = any(
                    a % p == 0 and b % p == 0 for a, b in zip(sys.a, sys.b)
                )
                if degenerate:
                    assert x == p
                else:
                    assert 1 <= x <= min(sys.k, p)

    def test_degenerate_form(self):
        # Multipliers (7, 6): third form is 42n + 7, identically 0 mod 7.
        sys = singular.forms_from_links((7, 6))
        assert singular.xi(7, sys) == 7

    def test_generic_prime_shortcut(self):
        # p coprime to the discriminant product must give xi = k.
        sys = singular.forms_from_links((2, 4))
        bigN = singular.discriminant_product(sys)
        for p in (3, 7, 11, 13):
            if bigN % p:
                assert singular.xi(p, sys) == sys.k


class TestDiscriminantProduct:
    def test_values(self):
        assert singular.discriminant_product(singular.forms_from_links((2,))) == 2
        # (2, 4): 2*4 * |1*1-2*0| * |1*5-8*0| * |2*5-8*1| = 8 * 1 * 5 * 2.
        assert singular.discriminant_product(singular.forms_from_links((2, 4))) == 80

    def test_single_form_unit(self):
        assert singular.discriminant_product(singular.forms_from_links(())) == 1


class TestSingularSeries:
    def test_twin_value(self, table):
        sv = singular.singular_series((2,), table=table)
        assert sv.value == pytest.approx(TWIN_CONSTANT, abs=1e-6)
        assert sv.lower <= TWIN_CONSTANT <= sv.upper

    def test_interval_ordering(self):
        sv = singular.singular_series((4, 2), prime_cutoff=10_000)
        assert sv.lower <= sv.value <= sv.upper
        assert sv.value > 0

    def test_vanishing_systems(self):
        # (1 -> n, n+1) and (3 -> n, 3n+1) are blocked mod 2; (2, 4) is
        # blocked mod 3 (its three forms cover all residues).
        assert singular.singular_series((1,), prime_cutoff=1000).value == 0.0
        assert singular.singular_series((3,), prime_cutoff=1000).value == 0.0
        assert singular.singular_series((2, 4), prime_cutoff=1000).value == 0.0

    def test_trivial_system_is_one(self):
        sv = singular.singular_series((), prime_cutoff=1000)
        assert sv.value == 1.0

    def test_generic_factor_against_full_scan(self, table):
        # Same product computed without the generic-prime shortcut: scan
        # xi(p) directly at every prime up to the cutoff.
        cutoff = 2000
        for ms in ((2,), (2, 4), (4, 2), (2, 2)):
            sv = singular.singular_series(ms, prime_cutoff=cutoff, table=table)
            sys = singular.forms_from_links(ms)
            log_total = 0.0
            vanished = False
            for p in table.primes(2, cutoff).tolist():
                x = xi_by_scan(p, sys)
                if x == p:
                    vanished = True
                    break
                log_total += math.log1p(-x / p) - sys.k * math.log1p(-1.0 / p)
            if vanished:
                assert sv.value == 0.0
            else:
                assert sv.value == pytest.approx(math.exp(log_total), rel=1e-12), ms

    def test_tail_shrinks_with_cutoff(self):
        small = singular.singular_series((2,), prime_cutoff=1000)
        large = singular.singular_series((2,), prime_cutoff=100_000)
        assert (large.upper - large.lower) < (small.upper - small.lower)
        assert small.lower <= large.value <= small.upper

    def test_guards(self):
        with pytest.raises(DomainError):
            singular.singular_series((0,))
        with pytest.raises(DomainError):
            singular.singular_series((2,), prime_cutoff=10)


class TestResidueBox:
    def test_hand_total(self):
        # p = 3, k = 2, one free multiplier: xi totals 1 + 2 + 2 = 5 and
        # the target is 3^2 - 2^2 = 5, so the bound is tight here.
        total, target = singular.rhopm_total(3, 2, (1,))
        assert (total, target) == (5, 5)

    def test_no_free_indices(self):
        assert singular.rhopm_check(5, 3, ())

    def test_exhaustive_small(self):
        for p in (2, 3, 5, 7):
            for k in (1, 2, 3, 4):
                idx = tuple(range(1, k))
                for r in range(1 << len(idx)):
                    free = tuple(i for j, i in enumerate(idx) if r >> j & 1)
                    assert singular.rhopm_check(p, k, free), (p, k, free)

    def test_random_fixed_assignments(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            p = int(rng.choice([2, 3, 5, 7, 11]))
            k = int(rng.integers(2, 5))
            idx = list(range(1, k))
            rng.shuffle(idx)
            cut = int(rng.integers(0, k))
            free = tuple(idx[:cut])
            fixed = {i: int(rng.integers(0, p)) for i in idx[cut:]}
            assert singular.rhopm_check(p, k, free, fixed)

    def test_box_capacity(self):
        with pytest.raises(CapacityError):
            singular.rhopm_check(37, 6, (1, 2, 3, 4, 5))

    def test_guards(self):
        with pytest.raises(DomainError):
            singular.rhopm_check(1, 2, ())
        with pytest.raises(DomainError):
            singular.rhopm_check(3, 2, (2,))
        with pytest.raises(DomainError):
            singular.rhopm_check(5, 3, (1,), {1: 0})
