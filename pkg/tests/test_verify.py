"""Best-response and regret checks against brute-force enumeration."""

import numpy as np
import pytest

from helpers import brute_force_best_response, random_plans
from seqnash.generators import matching_pennies, rock_paper_scissors
from seqnash.seqform import (build_sequence_form, embed_strategic_form,
                             normalize_plans, realization_to_behavioral)
from seqnash.verify import (best_response_value, epsilon, epsilon_report,
                            expected_payoffs)
from seqnash.zerosum import solve_zero_sum


def test_best_response_matches_enumeration_kuhn2(kuhn2):
    sf = build_sequence_form(kuhn2)
    rng = np.random.default_rng(31)
    for _ in range(8):
        profile = realization_to_behavioral(sf, random_plans(sf, rng))
        for p in range(2):
            fast = best_response_value(kuhn2, profile, p)
            slow = brute_force_best_response(kuhn2, profile, p)
            assert fast == pytest.approx(slow, abs=1e-12)


def test_best_response_matches_enumeration_kuhn3(kuhn3_reduced):
    sf = build_sequence_form(kuhn3_reduced)
    rng = np.random.default_rng(32)
    for _ in range(3):
        profile = realization_to_behavioral(sf, random_plans(sf, rng))
        for p in range(3):
            fast = best_response_value(kuhn3_reduced, profile, p)
            slow = brute_force_best_response(kuhn3_reduced, profile, p)
            assert fast == pytest.approx(slow, abs=1e-12)


def test_best_response_never_below_expected(kuhn3_reduced):
    sf = build_sequence_form(kuhn3_reduced)
    rng = np.random.default_rng(33)
    for _ in range(5):
        profile = realization_to_behavioral(sf, random_plans(sf, rng))
        exp = expected_payoffs(kuhn3_reduced, profile)
        for p in range(3):
            assert best_response_value(kuhn3_reduced, profile, p) >= exp[p] - 1e-12


def test_report_consistency(kuhn2):
    sf = build_sequence_form(kuhn2)
    rng = np.random.default_rng(34)
    profile = realization_to_behavioral(sf, random_plans(sf, rng))
    rep = epsilon_report(kuhn2, profile)
    gaps = np.asarray(rep.best_response) - np.asarray(rep.expected)
    assert rep.epsilon == pytest.approx(gaps.max())
    assert epsilon(kuhn2, profile) == rep.epsilon


def test_zero_sum_expected_sums_to_zero(kuhn2):
    sf = build_sequence_form(kuhn2)
    rng = np.random.default_rng(35)
    for _ in range(5):
        profile = realization_to_behavioral(sf, random_plans(sf, rng))
        assert expected_payoffs(kuhn2, profile).sum() == pytest.approx(0, abs=1e-12)


def test_always_betting_the_jack_is_exploitable(kuhn2):
    # start from an optimal profile, then force the jack to bet every time;
    # the opponent's exploitation is worth exactly 1/3 against it
    sf = build_sequence_form(kuhn2)
    res = solve_zero_sum(kuhn2)
    plans = [x.copy() for x in res.realization]
    labels = sf.seq_labels[0]
    plans[0][labels.index("J:->bet")] = 1.0
    plans[0][labels.index("J:->check")] = 0.0
    for i, lab in enumerate(labels):
        if lab.startswith("J:kb"):
            plans[0][i] = 0.0
    tampered = realization_to_behavioral(sf, plans)
    rep = epsilon_report(kuhn2, tampered)
    assert rep.epsilon > 0.01
    assert rep.epsilon == pytest.approx(1 / 3, abs=1e-9)


def test_matching_pennies_pure_profile_regret():
    mp = matching_pennies()
    sf = embed_strategic_form(mp)
    both_heads = normalize_plans(sf, [np.array([1.0, 0.0]), np.array([1.0, 0.0])])
    rep = epsilon_report(mp, both_heads)
    assert list(rep.expected) == [1.0, -1.0]
    assert rep.epsilon == pytest.approx(2.0)


def test_uniform_rps_is_exact():
    rps = rock_paper_scissors()
    sf = embed_strategic_form(rps)
    third = np.full(3, 1 / 3)
    profile = normalize_plans(sf, [third, third])
    assert epsilon(rps, profile) <= 1e-12
