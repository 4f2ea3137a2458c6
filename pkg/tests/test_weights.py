import random
from fractions import Fraction

import pytest

from fairdraw import (
    CandidateId,
    SpecError,
    WeightedEligibleList,
    candidate_at,
    from_decimal,
    from_fractions,
    materialize,
    uniform_list,
)


def cid(name):
    return CandidateId(name)


def test_uniform_list():
    lst = uniform_list([cid(f"c{i}") for i in range(5)])
    assert lst.index_space == 5
    assert all(w == 1 for _, w in lst.entries)


def test_uniform_single():
    assert uniform_list([cid("only")]).index_space == 1


def test_uniform_duplicate():
    with pytest.raises(SpecError, match="dup"):
        uniform_list([cid("dup"), cid("dup")])


def test_from_fractions_common_denominator():
    # probabilities 1/10, 2/10, 3/10, 4/10 expand to a 10-long virtual list
    lst = from_fractions([
        (cid("e0"), Fraction(1, 10)),
        (cid("e1"), Fraction(2, 10)),
        (cid("e2"), Fraction(3, 10)),
        (cid("e3"), Fraction(4, 10)),
    ])
    assert lst.index_space == 10
    assert [w for _, w in lst.entries] == [1, 2, 3, 4]


def test_from_fractions_lcm():
    # lcm(6, 4, 4, 3) = 12, counts 2, 3, 3, 4
    lst = from_fractions([
        (cid("e0"), Fraction(1, 6)),
        (cid("e1"), Fraction(1, 4)),
        (cid("e2"), Fraction(1, 4)),
        (cid("e3"), Fraction(1, 3)),
    ])
    assert lst.index_space == 12
    assert [w for _, w in lst.entries] == [2, 3, 3, 4]


def test_from_fractions_bad_sum():
    with pytest.raises(SpecError, match="5/6"):
        from_fractions([(cid("a"), Fraction(1, 2)), (cid("b"), Fraction(1, 3))])


def test_from_fractions_lcm_overflow():
    import sympy  # only to build coprime denominators

    primes = list(sympy.primerange(100, 200))[:6]
    total = 1
    for p in primes:
        total *= p
    assert total > 2**32
    weights = [(cid(f"c{i}"), Fraction(1, p)) for i, p in enumerate(primes)]
    rest = 1 - sum(f for _, f in weights)
    weights.append((cid("rest"), rest))
    with pytest.raises(SpecError, match="rescale"):
        from_fractions(weights)


def test_from_fractions_order_invariant():
    weights = [
        (cid("e0"), Fraction(1, 6)),
        (cid("e1"), Fraction(1, 4)),
        (cid("e2"), Fraction(1, 4)),
        (cid("e3"), Fraction(1, 3)),
    ]
    shuffled = list(weights)
    random.Random(7).shuffle(shuffled)
    assert from_fractions(weights) == from_fractions(shuffled)


def test_from_decimal_centesimal():
    lst = from_decimal([(cid("a"), "0.25"), (cid("b"), "0.25"), (cid("c"), "0.50")])
    assert lst.index_space == 100
    assert [w for _, w in lst.entries] == [25, 25, 50]


def test_from_decimal_millesimal():
    lst = from_decimal([(cid("a"), "0.333"), (cid("b"), "0.333"), (cid("c"), "0.334")])
    assert lst.index_space == 1000
    assert [w for _, w in lst.entries] == [333, 333, 334]


def test_from_decimal_bad_sum():
    with pytest.raises(SpecError, match="0.6"):
        from_decimal([(cid("a"), "0.3"), (cid("b"), "0.3")])


def test_from_decimal_scale_guard():
    with pytest.raises(SpecError, match="guard"):
        from_decimal([(cid("a"), "0.5000000001"), (cid("b"), "0.4999999999")])


def test_candidate_at_block_layout():
    lst = WeightedEligibleList((
        (cid("e0"), 1), (cid("e1"), 2), (cid("e2"), 3), (cid("e3"), 4),
    ))
    assert candidate_at(lst, 0) == cid("e0")
    assert candidate_at(lst, 2) == cid("e1")
    assert candidate_at(lst, 9) == cid("e3")


def test_candidate_at_materialized_oracle():
    lst = WeightedEligibleList((
        (cid("e0"), 2), (cid("e1"), 3), (cid("e2"), 3), (cid("e3"), 4),
    ))
    expanded = materialize(lst)
    assert len(expanded) == 12
    assert candidate_at(lst, 4) == expanded[4] == cid("e1")
    for i in range(12):
        assert candidate_at(lst, i) == expanded[i]


def test_candidate_at_out_of_range():
    lst = uniform_list([cid("a"), cid("b")])
    with pytest.raises(SpecError):
        candidate_at(lst, 2)
    with pytest.raises(SpecError):
        candidate_at(lst, -1)


def test_oracle_equivalence_randomized():
    rng = random.Random(99)
    for _ in range(50):
        n = rng.randint(1, 8)
        entries = tuple(
            (cid(f"c{i:02d}"), rng.randint(1, 40)) for i in range(n)
        )
        lst = WeightedEligibleList(entries)
        expanded = materialize(lst)
        for i in range(lst.index_space):
            assert candidate_at(lst, i) == expanded[i]


def test_exact_probability_by_enumeration():
    # exhaustive: every index hit once means candidate mass = weight / total
    lst = WeightedEligibleList(((cid("a"), 2), (cid("b"), 5), (cid("c"), 3)))
    hits = {c: 0 for c, _ in lst.entries}
    for i in range(lst.index_space):
        hits[candidate_at(lst, i)] += 1
    assert hits == {cid("a"): 2, cid("b"): 5, cid("c"): 3}


def test_invariants_rejected():
    with pytest.raises(SpecError):
        WeightedEligibleList(())
    with pytest.raises(SpecError):
        WeightedEligibleList(((cid("b"), 1), (cid("a"), 1)))  # unsorted
    with pytest.raises(SpecError):
        WeightedEligibleList(((cid("a"), 0),))  # zero weight
