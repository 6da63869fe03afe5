"""Feasibility-system assembly: counts, gradients, products, residuals."""

import math

import numpy as np
import pytest

from seqnash.ncp import (ProductPlan, assemble_ncp, best_response_duals,
                         build_system, certified_assignment, gradients,
                         pair_product_scheme, residuals)
from seqnash.generators import (generate_random_sfg, matching_pennies,
                                rock_paper_scissors)
from seqnash.seqform import build_sequence_form, embed_strategic_form


def _rand_plans(sf, rng):
    plans = []
    for p in range(sf.num_players):
        x = np.zeros(sf.dims[p])
        if sf.has_empty_sequence:
            x[0] = 1.0
            for rec in sf.infosets[p]:
                probs = rng.dirichlet(np.ones(len(rec.action_seqs)))
                for s, q in zip(rec.action_seqs, probs):
                    x[s] = x[rec.parent_seq] * q
        else:
            x[:] = rng.dirichlet(np.ones(sf.dims[p]))
        plans.append(x)
    return plans


def test_kuhn3_system_counts_with_pins(kuhn3_full):
    game, pins = kuhn3_full
    system = assemble_ncp(build_sequence_form(game, pins))
    c = system.counts()
    assert c.variables == 249
    assert (c.x_vars, c.multiplier_vars, c.slack_vars) == (99, 51, 99)
    assert c.quadratic_rows == 198
    assert (c.stationarity_rows, c.complementarity_rows) == (99, 99)
    assert c.linear_rows == 72
    assert (c.flow_rows, c.pin_rows) == (51, 21)
    assert c.aux_vars == c.product_rows == 0


def test_kuhn3_system_counts_without_pins(kuhn3_full):
    game, _ = kuhn3_full
    c = assemble_ncp(build_sequence_form(game)).counts()
    assert c.linear_rows == 51
    assert c.pin_rows == 0
    assert c.variables == 249 and c.quadratic_rows == 198


def test_build_system_is_assemble_ncp():
    assert build_system is assemble_ncp


def test_charge_bound_formula(kuhn3_full):
    # bound on any multiplier sum: (1 + constraint rows) * largest weighted payoff
    game, pins = kuhn3_full
    sf = build_sequence_form(game, pins)
    system = assemble_ncp(sf)
    peak = max(abs(v) for e in sf.payoff_entries for v in e.values)
    assert peak == pytest.approx(4 / 24)
    for p in range(3):
        assert system.M[p] == pytest.approx((1 + sf.row_counts[p]) * peak)
    assert system.M == [3.0, 3.0, 3.0]


def test_gradient_matches_finite_difference(kuhn3_reduced):
    sf = build_sequence_form(kuhn3_reduced)
    rng = np.random.default_rng(2)
    plans = _rand_plans(sf, rng)
    grads = gradients(sf, plans)
    seqs, vals = sf.entry_arrays()
    for p in range(3):
        slow = np.zeros(sf.dims[p])
        for (s, v) in zip(seqs, vals):
            prod = 1.0
            for q in range(3):
                if q != p:
                    prod *= plans[q][s[q]]
            slow[s[p]] += v[p] * prod
        assert np.allclose(grads[p], slow, atol=1e-12)


def test_gradient_is_multilinear_derivative():
    # bump one realization weight: payoff moves by the gradient entry
    sf = embed_strategic_form(generate_random_sfg(3, 3, seed=4))
    rng = np.random.default_rng(9)
    plans = _rand_plans(sf, rng)
    grads = gradients(sf, plans)
    from seqnash.seqform import multilinear_payoffs
    base = multilinear_payoffs(sf, plans)
    h = 1e-6
    for p in range(3):
        for s in range(sf.dims[p]):
            bumped = [x.copy() for x in plans]
            bumped[p][s] += h
            diff = (multilinear_payoffs(sf, bumped)[p] - base[p]) / h
            assert grads[p][s] == pytest.approx(diff, abs=1e-5)


@pytest.mark.parametrize("n,dims,expect", [
    (1, (4,), 0),
    (2, (3, 3), 0),
    (3, (5, 5, 5), 0),
    (4, (2, 2, 2, 2), 8),
    (5, (2, 2, 2, 2, 2), 24),
    (4, (3, 3, 3, 3), 18),
])
def test_product_scheme_aux_totals(n, dims, expect):
    plan = pair_product_scheme(n, dims)
    assert isinstance(plan, ProductPlan)
    assert plan.total_aux == expect
    assert sum(plan.aux_counts.values()) == expect


def test_product_scheme_small_covers():
    plan = pair_product_scheme(3, (2, 2, 2))
    # for three players each cover is the two single-opponent factors
    assert plan.covers == (((1,), (2,)), ((0,), (2,)), ((0,), (1,)))
    assert plan.factor_defs == {}


def test_product_scheme_cover_partition():
    for n, dims in [(4, (2, 3, 2, 3)), (5, (2,) * 5), (6, (2,) * 6)]:
        plan = pair_product_scheme(n, dims)
        for p, cover in enumerate(plan.covers):
            members = sorted(q for f in cover for q in f)
            assert members == [q for q in range(n) if q != p]
            assert len(cover) <= 2
            for f in cover:
                if len(f) > 1:
                    assert f in plan.factor_defs or f in plan.aux_counts


def test_product_scheme_defs_children_first():
    plan = pair_product_scheme(5, (2,) * 5)
    seen = set()
    for key, (left, right) in plan.factor_defs.items():
        for part in (left, right):
            if len(part) > 1:
                assert part in seen
        seen.add(key)
        assert plan.aux_counts[key] == math.prod([2] * len(key))


def test_product_scheme_shared_subfactors():
    # the greedy right-to-left merge reuses one shared triple for five players
    plan = pair_product_scheme(5, (2,) * 5)
    assert plan.total_aux == 24
    # a one-sided (left-anchored) merge would cost 40 auxiliaries instead
    naive = 0
    for p in range(5):
        others = [q for q in range(5) if q != p]
        for k in range(2, len(others)):
            naive += 2 ** (k + 1)
    assert naive > plan.total_aux


def test_product_scheme_validates():
    with pytest.raises(ValueError):
        pair_product_scheme(0, ())
    with pytest.raises(ValueError):
        pair_product_scheme(3, (2, 2))


def test_four_player_system_has_aux_rows():
    sf = embed_strategic_form(generate_random_sfg(4, 2, seed=0))
    c = assemble_ncp(sf).counts()
    assert c.aux_vars == 8
    assert c.product_rows == 8


def test_matching_pennies_hand_equilibrium():
    system = assemble_ncp(embed_strategic_form(matching_pennies()))
    v = certified_assignment(system, [np.array([0.5, 0.5])] * 2)
    report = system.residual_report(v)
    assert report["max"] <= 1e-12
    assert residuals(system, v) == report


def test_rps_hand_equilibrium():
    system = assemble_ncp(embed_strategic_form(rock_paper_scissors()))
    third = np.full(3, 1 / 3)
    report = system.residual_report(certified_assignment(system, [third, third]))
    assert report["max"] <= 1e-12


def test_all_zero_assignment_violates_flow():
    system = assemble_ncp(embed_strategic_form(matching_pennies()))
    report = system.residual_report(np.zeros(system.num_vars))
    assert report["linear"] == 1.0


def test_non_equilibrium_has_residual(kuhn2):
    system = assemble_ncp(build_sequence_form(kuhn2))
    rng = np.random.default_rng(14)
    plans = _rand_plans(system.sf, rng)
    report = system.residual_report(certified_assignment(system, plans))
    # certified assignments force stationarity rows to hold, so a wrong
    # profile must show up in the complementarity block
    assert report["stationarity"] <= 1e-9
    assert report["complementarity"] > 1e-4


def test_best_response_duals_slack_signs(kuhn2):
    sf = build_sequence_form(kuhn2)
    rng = np.random.default_rng(21)
    plans = _rand_plans(sf, rng)
    for p in range(2):
        lam, slack, value = best_response_duals(sf, plans, p)
        assert slack.min() >= -1e-9
        assert lam.shape == (sf.row_counts[p],)
        assert np.isfinite(value)


def test_descendant_x_vars(kuhn2):
    system = assemble_ncp(build_sequence_form(kuhn2))
    sf = system.sf
    # betting with the jack leads to the facing-call infoset downstream
    label_of = {i: lab for i, lab in enumerate(sf.seq_labels[0])}
    check = next(i for i, l in label_of.items() if l == "J:->check")
    below = system.descendant_x_vars(system.x_offset[0] + check)
    labels = {system.var_labels[i] for i in below}
    # strict descendants: both continuations at the facing-a-bet infoset
    assert labels == {"x0:J:kb->fold", "x0:J:kb->call"}
    # terminal sequences have nothing below them
    fold = sf.seq_labels[0].index("J:kb->fold")
    assert system.descendant_x_vars(system.x_offset[0] + fold) == []
