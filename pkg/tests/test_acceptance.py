"""Acceptance gate: ten binding criteria, one test and one verdict line each.

Every tolerance and time budget below is part of the package contract and
must not be loosened.  Times are wall-clock seconds on the machine running
the suite; each criterion asserts its own budget.
"""

import time

import numpy as np
import pytest

from helpers import brute_force_best_response, random_plans
from seqnash.bnb import EQUILIBRIUM_FOUND, SolverOptions, solve
from seqnash.games import prune_pins
from seqnash.generators import (generate_kuhn2, generate_kuhn3,
                                generate_random_sfg, matching_pennies,
                                rock_paper_scissors)
from seqnash.jsonio import profile_to_json
from seqnash.ncp import assemble_ncp, certified_assignment
from seqnash.seqform import (build_sequence_form, embed_strategic_form,
                             multilinear_payoffs, realization_to_behavioral)
from seqnash.verify import best_response_value, expected_payoffs
from seqnash.zerosum import solve_zero_sum

KUHN2_VALUE = -1 / 18  # frozen; rebuilt from the normal-form oracle in test_zerosum


@pytest.fixture
def verdict(capfd):
    """One PASS/FAIL line per criterion, printed past output capture."""
    def emit(num: int, ok: bool, note: str) -> None:
        with capfd.disabled():
            print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} ({note})",
                  flush=True)
        assert ok, f"criterion {num} failed: {note}"
    return emit


def test_criterion_01_tree_structure(verdict):
    t0 = time.perf_counter()
    game, pins = generate_kuhn3()
    reduced = prune_pins(game, pins)
    elapsed = time.perf_counter() - t0
    c = game.counts()
    r = reduced.counts()
    ok = ((c.total, c.decision, c.terminal, c.chance) == (601, 288, 312, 1)
          and sum(c.infosets_per_player) == 48
          and (r.total, r.decision, r.terminal, r.chance) == (415, 252, 162, 1)
          and sum(r.infosets_per_player) == 48
          and elapsed < 1.0)
    verdict(1, ok, f"full 601/288/312/1, reduced 415/252/162/1, "
                    f"48 infosets, {elapsed:.3f}s")


def test_criterion_02_model_size(verdict, kuhn3_full):
    game, pins = kuhn3_full
    t0 = time.perf_counter()
    pinned = assemble_ncp(build_sequence_form(game, pins)).counts()
    plain = assemble_ncp(build_sequence_form(game)).counts()
    elapsed = time.perf_counter() - t0
    ok = (pinned.variables == 249 and pinned.quadratic_rows == 198
          and pinned.linear_rows == 72 and plain.linear_rows == 51
          and elapsed < 1.0)
    verdict(2, ok, f"249 vars, 198 quadratic, 72/51 linear rows, "
                    f"{elapsed:.3f}s")


def test_criterion_03_kuhn3_reduced_solve(verdict, kuhn3_reduced):
    t0 = time.perf_counter()
    res = solve(kuhn3_reduced, options=SolverOptions(epsilon=1e-6, seed=0,
                                                     time_limit=900.0))
    elapsed = time.perf_counter() - t0
    ok = (res.status == EQUILIBRIUM_FOUND and res.epsilon is not None
          and res.epsilon <= 1e-6 and elapsed < 900.0)
    verdict(3, ok, f"status {res.status}, epsilon {res.epsilon:.3g}, "
                    f"{elapsed:.2f}s (budget 900s)")


def test_criterion_04_zero_sum_oracle(verdict, kuhn2):
    t0 = time.perf_counter()
    res = solve_zero_sum(kuhn2)
    elapsed = time.perf_counter() - t0
    ok = (abs(res.value - KUHN2_VALUE) <= 1e-9
          and res.objective_gap <= 1e-7
          and res.epsilon <= 1e-7
          and elapsed < 5.0)
    verdict(4, ok, f"value {res.value:.12g} vs -1/18, gap "
                    f"{res.objective_gap:.2g}, epsilon {res.epsilon:.2g}, "
                    f"{elapsed:.2f}s")


def test_criterion_05_strategic_form_suite(verdict):
    worst_eps, worst_time = 0.0, 0.0
    ok = True
    for n, m in ((3, 3), (3, 4), (5, 2)):
        for seed in range(20):
            game = generate_random_sfg(n, m, seed=seed)
            t0 = time.perf_counter()
            res = solve(game, options=SolverOptions(epsilon=1e-6, seed=seed,
                                                    time_limit=120.0))
            dt = time.perf_counter() - t0
            worst_time = max(worst_time, dt)
            if res.status != EQUILIBRIUM_FOUND or res.epsilon > 1e-6 or dt >= 120.0:
                ok = False
            else:
                worst_eps = max(worst_eps, res.epsilon)
    verdict(5, ok, f"60 games, worst epsilon {worst_eps:.3g}, worst time "
                    f"{worst_time:.2f}s (budget 120s each)")


def test_criterion_06_four_player_pairing(verdict):
    worst_time = 0.0
    ok = True
    for seed in range(10):
        game = generate_random_sfg(4, 2, seed=seed)
        system = assemble_ncp(embed_strategic_form(game))
        if system.counts().aux_vars != 8:
            ok = False
        t0 = time.perf_counter()
        res = solve(game, options=SolverOptions(epsilon=1e-6, seed=seed,
                                                time_limit=300.0))
        dt = time.perf_counter() - t0
        worst_time = max(worst_time, dt)
        if res.status != EQUILIBRIUM_FOUND or res.epsilon > 1e-6 or dt >= 300.0:
            ok = False
    verdict(6, ok, f"10 games, 8 auxiliary variables each, worst time "
                    f"{worst_time:.2f}s (budget 300s each)")


def test_criterion_07_best_response_oracle(verdict, kuhn3_reduced):
    sf = build_sequence_form(kuhn3_reduced)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        profile = realization_to_behavioral(sf, random_plans(sf, rng))
        for p in range(3):
            fast = best_response_value(kuhn3_reduced, profile, p)
            slow = brute_force_best_response(kuhn3_reduced, profile, p)
            worst = max(worst, abs(fast - slow))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 120.0
    verdict(7, ok, f"100 profiles x 3 players, worst gap {worst:.2g}, "
                    f"{elapsed:.1f}s (budget 120s)")


def test_criterion_08_sequence_form_identity(verdict, kuhn3_full, kuhn3_reduced, kuhn2):
    games = [kuhn3_full[0], kuhn3_reduced, kuhn2,
             matching_pennies(), rock_paper_scissors()]
    rng = np.random.default_rng(8)
    worst = 0.0
    ok = True
    for game in games:
        sf = (build_sequence_form(game) if not hasattr(game, "payoffs")
              else embed_strategic_form(game))
        for _ in range(100):
            plans = random_plans(sf, rng)
            profile = realization_to_behavioral(sf, plans)
            gap = np.max(np.abs(expected_payoffs(game, profile)
                                - multilinear_payoffs(sf, plans)))
            worst = max(worst, gap)
            if gap > 1e-9:
                ok = False
    verdict(8, ok, f"100 profiles on each of 5 bundled games, worst gap "
                    f"{worst:.2g}")


def test_criterion_09_injected_equilibria(verdict, kuhn2):
    worst = 0.0
    cases = []
    mp = matching_pennies()
    cases.append((embed_strategic_form(mp), [np.full(2, 0.5)] * 2))
    rps = rock_paper_scissors()
    cases.append((embed_strategic_form(rps), [np.full(3, 1 / 3)] * 2))
    res = solve_zero_sum(kuhn2)
    cases.append((build_sequence_form(kuhn2),
                  [np.asarray(x) for x in res.realization]))
    for sf, plans in cases:
        system = assemble_ncp(sf)
        report = system.residual_report(certified_assignment(system, plans))
        worst = max(worst, report["max"])
    ok = worst <= 1e-9
    verdict(9, ok, f"matching pennies, RPS, kuhn2 LP point; worst residual "
                    f"{worst:.2g}")


def test_criterion_10_determinism(verdict, kuhn3_reduced, kuhn2):
    ok = True
    notes = []
    for game, opts in ((kuhn3_reduced, SolverOptions(workers=1, seed=7)),
                       (kuhn2, SolverOptions(workers=1, seed=7,
                                             interior_iters=0))):
        a = solve(game, options=opts)
        b = solve(game, options=opts)
        same = (a.stats.nodes == b.stats.nodes
                and profile_to_json(a.profile) == profile_to_json(b.profile))
        ok = ok and same
        notes.append(f"nodes {a.stats.nodes}={b.stats.nodes}")
    verdict(10, ok, "identical node counts and byte-identical profiles; "
                     + ", ".join(notes))
