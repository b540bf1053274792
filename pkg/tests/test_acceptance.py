"""Acceptance gate: ten criteria, one printed PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Criteria 1, 3, 5, 6, 7, 8, 9 delegate to the named verification
suites under the frozen calibrated config; criteria 2, 4, 10 are exact
desk-scale oracles evaluated here.
"""

import dataclasses
import math
import random
import time
from fractions import Fraction

import pytest

from lostructure.concentration import conc_interval, conc_zero
from lostructure.config import calibrated_config
from lostructure.distributions import (
    DiscreteDistribution,
    WeightVector,
    from_scalar_atoms,
    rademacher,
    weighted_sum_law,
    weights_1d,
)
from lostructure.errors import EmbeddingNotFound, SandwichNotFound
from lostructure.gap import (
    Gap,
    SymmetricPolytope,
    box_body,
    cgap_image,
    dilate,
    embed_proper,
    image,
    is_t_proper,
    lattice_points,
    mahler_sandwich,
)
from lostructure.harness import gen_planted, run_suite, window_params_for_outliers
from lostructure.recovery import recover


@pytest.fixture(scope="module")
def cfg():
    return calibrated_config()


def report(num: int, name: str, ok: bool, detail: str = ""):
    line = f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line, flush=True)
    assert ok, line


def run_and_report(num: int, suite: str, cfg, budget: float | None = None):
    t0 = time.time()
    rep = run_suite(suite, cfg)
    elapsed = time.time() - t0
    ok = rep.passes == rep.instances
    detail = f"{rep.passes}/{rep.instances} in {elapsed:.1f}s"
    if not ok:
        detail += f"; first failures: {rep.failures[:3]}"
    if budget is not None and elapsed >= budget:
        ok = False
        detail += f"; over {budget:.0f}s budget"
    report(num, suite, ok, detail)


def test_01_regularity(cfg):
    run_and_report(1, "regularity", cfg, budget=60.0)


def brute_window(F: DiscreteDistribution, tau: Fraction) -> Fraction:
    vals = sorted(v[0] for v, _ in F.atoms)
    mass = {v[0]: m for v, m in F.atoms}
    best = Fraction(0)
    for lo in vals:
        best = max(best, sum(mass[w] for w in vals if lo <= w <= lo + tau))
    return best


def test_02_concentration_oracle(cfg):
    checked = 0
    for i in range(100):
        rng = random.Random(9000 + i)
        acc = {}
        for _ in range(rng.randint(2, 12)):
            v = Fraction(rng.randint(-40, 40), rng.randint(1, 6))
            acc[v] = acc.get(v, 0) + rng.randint(1, 9)
        total = sum(acc.values())
        F = from_scalar_atoms([(v, Fraction(m, total)) for v, m in acc.items()])
        tau = Fraction(rng.randint(1, 60), rng.randint(1, 5))
        res = conc_interval(F, tau)
        assert res.value == brute_window(F, tau)
        c = res.witness[0]
        hw = tau / 2
        assert sum(m for v, m in F.atoms if abs(v[0] - c) <= hw) == res.value
        checked += 1
    for n in range(2, 21):
        law = weighted_sum_law(rademacher(), weights_1d([1] * n))
        assert conc_zero(law).value == Fraction(math.comb(n, n // 2), 2**n)
        checked += 1
    report(2, "concentration_oracle", True, f"{checked} exact comparisons")


def test_03_gap_laws(cfg):
    run_and_report(3, "gap_laws", cfg)


def random_rank2_body(rng: random.Random) -> SymmetricPolytope:
    box = box_body([Fraction(rng.randint(2, 12), 2), Fraction(rng.randint(2, 12), 2)])
    cons = list(box.constraints)
    for _ in range(rng.randint(0, 2)):
        u = (rng.randint(-3, 3), rng.randint(-3, 3))
        if u == (0, 0):
            u = (1, 1)
        cons.append((tuple(Fraction(c) for c in u), Fraction(rng.randint(1, 12), 2)))
    return SymmetricPolytope(2, tuple(cons))


def test_04_sandwich_and_embedding(cfg):
    sandwich_misses, embed_misses = [], []
    for i in range(100):
        rng = random.Random(424242 + i)
        V = random_rank2_body(rng)
        try:
            P, t_star = mahler_sandwich(V, cap_t=16.0, enum_cap=cfg.enum_cap)
        except SandwichNotFound as exc:
            sandwich_misses.append((i, str(exc)))
            continue
        pts = set(lattice_points(V, enum_cap=cfg.enum_cap))
        assert t_star <= 16
        assert image(P, cfg.enum_cap) <= pts
        assert pts <= image(dilate(P, t_star), cfg.enum_cap)
    for i in range(100):
        rng = random.Random(515151 + i)
        gens = []
        while len(gens) < 2:
            g = Fraction(rng.randint(-12, 12), rng.randint(1, 4))
            if g != 0:
                gens.append((g,))
        P = Gap(1, 2, (Fraction(rng.randint(1, 8)), Fraction(rng.randint(1, 8))), tuple(gens))
        try:
            res = embed_proper(P, enum_cap=cfg.enum_cap)
        except EmbeddingNotFound as exc:
            embed_misses.append((i, str(exc)))
            continue
        assert is_t_proper(res.gap, 1, cfg.enum_cap)
        assert image(P, cfg.enum_cap) <= image(res.gap, cfg.enum_cap)
    for label, misses in (("sandwich", sandwich_misses), ("embed", embed_misses)):
        for idx, msg in misses:
            print(f"  criterion 4 {label} miss at instance {idx}: {msg}")
    ok = len(sandwich_misses) <= 5 and len(embed_misses) <= 5
    report(
        4,
        "sandwich_embedding",
        ok,
        f"misses: {len(sandwich_misses)} sandwich, {len(embed_misses)} embed (<= 5 each)",
    )


def test_05_beta_oracle(cfg):
    run_and_report(5, "beta_oracle", cfg)


def test_06_recovery_coverage(cfg):
    run_and_report(6, "recovery", cfg)


def test_07_product_recovery(cfg):
    run_and_report(7, "product_recovery", cfg)


def test_08_ratio_stability(cfg):
    run_and_report(8, "ratio_stability", cfg, budget=300.0)


def test_09_log_rank(cfg):
    run_and_report(9, "log_rank", cfg)


def test_10_scaling_equivariance(cfg):
    inst = gen_planted("outliers", {"n_pad": 6200, "n_sig": 45, "n_out": 2}, seed=0)
    params = window_params_for_outliers(inst, cfg)
    base = recover(inst.weight, inst.law, params, cfg)
    base_cg = cgap_image(base.K_star, cfg.enum_cap)
    base_tilde = image(base.tilde_P, cfg.enum_cap)
    for lam in (Fraction(2), Fraction(1, 3)):
        wa = WeightVector(1, tuple((lam * e[0],) for e in inst.weight.entries))
        pa = dataclasses.replace(
            params, tau=lam * params.tau, kappa=lam * params.kappa, delta=lam * params.delta
        )
        rep = recover(wa, inst.law, pa, cfg)
        assert rep.m == base.m
        assert rep.flags == base.flags
        assert rep.coverage == base.coverage
        assert rep.sizes == base.sizes
        assert cgap_image(rep.K_star, cfg.enum_cap) == {lam * y for y in base_cg}
        assert image(rep.tilde_P, cfg.enum_cap) == {lam * y for y in base_tilde}
    report(10, "scaling_equivariance", True, "lambda in {2, 1/3}, exact")
