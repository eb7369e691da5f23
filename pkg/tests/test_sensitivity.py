import math
from fractions import Fraction

import numpy as np
import pytest

from brute import shifted_distance_exponents, word_array
from senstropy.measures import bernoulli, build_markov_measure, orbit_measure
from senstropy.sensitivity import (
    first_sensitive_time_measure,
    first_sensitive_time_top,
    rate_a1,
    rate_a2_profile,
    rate_mu_bowen,
    rate_mu_direct,
    ratio,
    reciprocal,
    union_family,
)
from senstropy.symbolic import (
    CylinderUnion,
    SymbolicPoint,
    iter_unions,
    parse_point,
    parse_union,
    periodic_points,
)

LOG2 = math.log(2)
HALF = Fraction(1, 2)
GOLDEN_P = [[HALF, HALF], [1, 0]]
HORIZON = 11


def brute_time(x, words, m, horizon=HORIZON):
    """Least ``n`` such that some admissible word ``y`` of length ``horizon``
    extending a word of ``words`` has ``rho(T^n x, T^n y) > 2**-m``, by the
    definition of the metric; ``None`` if no ``n <= horizon - m`` works."""
    best = None
    xs = x.prefix(horizon)
    for y in words:
        for n in range(0, horizon - m + 1):
            j = next((k for k in range(n, horizon) if xs[k] != y[k]), None)
            if j is not None and 2.0 ** -(j - n) > 2.0 ** -m:
                best = n if best is None else min(best, n)
                break
    return best


def extensions(sft_or_pred, V, horizon):
    words = V.sft.words(horizon)
    return [w for w in words if w[: V.level] in V.words and sft_or_pred(w)]


CASES = ["full2", "golden", "two_fixed"]


@pytest.mark.parametrize("name", CASES)
def test_top_time_matches_brute_force(request, name):
    sft = request.getfixturevalue(name)
    pts = periodic_points(sft, 3) + [x for x in map(parse_point, ["0:01", "10:0", "1:0"])
                                     if sft.contains(x)]
    for V in [U for L in (1, 2) for U in iter_unions(sft, L)]:
        ys = extensions(lambda w: True, V, HORIZON)
        for x in pts:
            for m in (1, 2, 3):
                s = first_sensitive_time_top(x, V, m, sft)
                b = brute_time(x, ys, m)
                if math.isinf(s):
                    assert b is None
                else:
                    assert b == s


def test_measure_time_matches_brute_force(full2, golden):
    for mu in (build_markov_measure(GOLDEN_P, None, full2), orbit_measure("001", full2),
               bernoulli([HALF, HALF], full2)):
        for V in [U for L in (1, 2) for U in iter_unions(full2, L)]:
            if not mu.positive_union(V):
                with pytest.raises(ValueError):
                    first_sensitive_time_measure(parse_point(":0"), V, 1, mu)
                continue
            ys = extensions(mu.positive, V, HORIZON)
            for x in periodic_points(full2, 3):
                for m in (1, 2, 3):
                    s = first_sensitive_time_measure(x, V, m, mu)
                    b = brute_time(x, ys, m)
                    assert (b is None) if math.isinf(s) else (b == s)


def test_first_time_examples(full2, golden, single):
    x = parse_point(":0")
    assert first_sensitive_time_top(x, parse_union("00", full2), 1) == 2
    assert first_sensitive_time_top(x, parse_union("1", full2), 1) == 0
    assert first_sensitive_time_top(x, parse_union("00", full2), 3) == 0
    assert first_sensitive_time_top(x, parse_union("0", single), 1) == math.inf
    assert first_sensitive_time_top(x, parse_union("0", single), 0) == math.inf
    mu = bernoulli([HALF, HALF], full2)
    assert first_sensitive_time_measure(x, parse_union("00", full2), 1, mu) == 2
    assert first_sensitive_time_measure(x, parse_union("00", full2), 3, mu) == 0
    orb = orbit_measure("0", full2)
    assert first_sensitive_time_measure(x, parse_union("0", full2), 5, orb) == math.inf


@pytest.mark.parametrize("name", ["full2", "golden"])
def test_window_semantics(request, name):
    """rho(T^n u, T^n v) > 2**-m  iff  u, v disagree somewhere in [n, n+m-1]."""
    sft = request.getfixturevalue(name)
    length = 12 if name == "golden" else 10
    words = word_array(sft, length)
    exps = shifted_distance_exponents(words)
    diff = words[:, None, :] != words[None, :, :]
    for n in range(length):
        for m in range(1, length - n + 1):
            lhs = exps[:, :, n] < m  # 2**-(j-n) > 2**-m
            rhs = diff[:, :, n:n + m].any(axis=2)
            assert (lhs == rhs).all()


def test_top_time_below_measure_time_and_monotone(golden):
    mus = [build_markov_measure(GOLDEN_P, None, golden), orbit_measure("01", golden),
           orbit_measure("001", golden)]
    for V in [U for L in (1, 2, 3) for U in iter_unions(golden, L)]:
        for x in periodic_points(golden, 4):
            prev = math.inf
            for m in range(1, 6):
                s = first_sensitive_time_top(x, V, m)
                assert s <= prev
                prev = s
                for mu in mus:
                    if mu.positive_union(V):
                        assert s <= first_sensitive_time_measure(x, V, m, mu)
            full = mus[0]
            if full.positive_union(V) and all(full.positive(w) for w in V.words):
                assert first_sensitive_time_top(x, V, 2) == \
                    first_sensitive_time_measure(x, V, 2, full)


def test_ratio_conventions():
    assert ratio(0.0, 0) == math.inf and ratio(3.0, 0) == math.inf
    assert ratio(2.0, math.inf) == 0 and ratio(2.0, 4) == 0.5
    assert reciprocal(0) == math.inf and reciprocal(math.inf) == 0


# --- rates ------------------------------------------------------------------


def test_rate_mu_bowen_cases(full2, golden):
    mu = bernoulli([HALF, HALF], full2)
    est = rate_mu_bowen(mu.sample_point(600, seed=2), mu, [2, 4], 500)
    assert est.value == pytest.approx(LOG2, abs=1e-10) and est.rate == pytest.approx(1 / LOG2)
    g = build_markov_measure(GOLDEN_P, None, golden)
    out = rate_mu_bowen(parse_point("011:0"), build_markov_measure(GOLDEN_P, None, full2), [2], 20)
    assert out.value == math.inf and out.rate == 0 and out.direction == "exact"
    atom = rate_mu_bowen(parse_point(":01"), orbit_measure("01", golden), [2, 4], 50)
    assert atom.value == 0 and atom.rate == math.inf
    assert rate_mu_bowen(parse_point(":0"), g, [2, 4], 200).details["case"] == "profile"


def test_rate_mu_direct_examples(full2):
    mu = bernoulli([HALF, HALF], full2)
    x = parse_point(":0")
    est = rate_mu_direct(x, mu, 1, 2, [parse_union("00", full2)])
    assert est.value == pytest.approx(LOG2)
    assert est.direction == "upper-estimate"
    vals = [rate_mu_direct(x, mu, 2, L).value for L in range(3, 11)]
    for L, v in zip(range(3, 11), vals):
        assert LOG2 - 1e-12 <= v <= LOG2 * L / (L - 1) + 1e-12
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    assert rate_mu_direct(x, mu, 1, 1).details["argmin"] != "1"


def test_rate_mu_direct_within_bracket(golden):
    mu = build_markov_measure(GOLDEN_P, None, golden)
    for x in periodic_points(golden, 4):
        for m in (1, 2, 3):
            est = rate_mu_direct(x, mu, m, 7)
            lo, hi = est.details["bracket_lower"], est.details["bracket_upper"]
            assert lo - 1e-12 <= est.value <= hi + 1e-12


def test_rate_a1_examples(full2, golden):
    est = rate_a1(parse_point(":0"), 1, 2, full2)
    assert est.value == math.inf and est.rate == 0
    x = parse_point(":01")
    s = first_sensitive_time_top(x, parse_union("0", golden), 1)
    est = rate_a1(x, 1, 1, golden)
    term = next(t for t in est.terms if str(t.union) == "0")
    assert term.capacity == 0.5 and term.ratio == pytest.approx(LOG2 / s)


def test_theorem_b_termwise(golden, full2):
    for sft, mus in ((golden, [build_markov_measure(GOLDEN_P, None, golden),
                               orbit_measure("001", golden)]),
                     (full2, [bernoulli([Fraction(7, 10), Fraction(3, 10)], full2),
                              build_markov_measure(GOLDEN_P, None, full2)])):
        for x in periodic_points(sft, 3):
            for m in (1, 2):
                a1 = rate_a1(x, m, 2, sft)
                for mu in mus:
                    d = rate_mu_direct(x, mu, m, 2, [t.union for t in a1.terms])
                    assert a1.value >= d.value - 1e-12


def test_union_family_sizes(golden, full2):
    assert len(union_family(golden, 2)) == 3 + 7
    fam = union_family(full2, 4, exhaustive_limit=8)
    assert len(fam) == 3 + 15 + 255 + 1 + 2 * 16


def test_rate_a2(full2, golden, single):
    for x in map(parse_point, [":0", ":01", "1:0"]):
        est = rate_a2_profile(x, 1, 1, range(1, 201), full2)
        assert est.value == pytest.approx(LOG2, abs=1e-12)
    est = rate_a2_profile(parse_point(":0"), 1, 1, range(100, 201), golden)
    phi = math.log((1 + math.sqrt(5)) / 2)
    assert abs(est.value - phi) <= 0.02 * phi
    assert rate_a2_profile(parse_point(":0"), 1, 1, range(1, 50), single).value == 0
    # every point obeys the upper bound
    for x in periodic_points(golden, 5):
        assert rate_a2_profile(x, 1, 2, range(50, 120), golden).value <= phi * 1.02
