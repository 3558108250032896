"""Exit criteria. Each test prints one PASS/FAIL line (collected in the
terminal summary) and asserts at the stated tolerance."""
import json
import time
from fractions import Fraction

import numpy as np

from qlab.cli import main
from qlab.ensembles import (
    Ensemble,
    achievable_fidelity,
    average_fidelity,
    ensemble_map_of,
    maps_equal,
    projective_reproduction,
)
from qlab.operators import (
    haar_random_state,
    operator_norm,
    projector,
    random_density,
    random_rank_one_povm,
)
from qlab.optimization import (
    FiducialSearchConfig,
    MonteCarloConfig,
    PovmSearchConfig,
    accessible_fidelity_search,
    consistent_with,
    find_fiducial,
    frame_potential,
    haar_average_fidelity,
    haar_integral_closed_form,
    haar_integral_factorial,
)
from qlab.structured_states import (
    PhiMap,
    depolarizing_consistency,
    mub_construct,
    mub_ensemble,
    mub_residuals,
    purity_from_probabilities,
    reconstruct_density,
    sic_probabilities,
    sic_uniqueness_check,
    verify_sic,
)

from conftest import ACCEPTANCE_LINES

SEED = 20260101


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def fresh_sic(d):
    res = find_fiducial(FiducialSearchConfig(d, seed=SEED))
    assert res.success, f"no SIC found in d={d}"
    return res


def random_povm(d, rng):
    return random_rank_one_povm(d, int(rng.integers(d, d * d + 3)), rng)


def random_ensemble(d, n, rng):
    kets = np.array([haar_random_state(d, rng) for _ in range(n)])
    return Ensemble(kets, rng.dirichlet(np.ones(n)))


def test_01_quantumness_value():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for d in range(2, 9):
        ens = fresh_sic(d).sic.ensemble
        for _ in range(50):
            val = achievable_fidelity(ens, random_povm(d, rng)).value
            worst = max(worst, abs(val - 2 / (d + 1)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 120
    record(1, ok, f"SIC achievable fidelity = 2/(d+1), d=2..8, 50 POVMs each: "
                  f"max error {worst:.2e} (< 1e-9), {elapsed:.1f}s (< 120s)")
    assert ok


def test_02_phi_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for d in range(2, 9):
        ens = fresh_sic(d).sic.ensemble
        cmp = maps_equal(ensemble_map_of(ens), PhiMap(d), n_probes=100,
                         rng=np.random.default_rng(SEED + d))
        worst = max(worst, cmp.residual)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 60
    record(2, ok, f"SIC map equals closed form on basis + 100 probes, d=2..8: "
                  f"residual {worst:.2e} (< 1e-10), {elapsed:.1f}s (< 60s)")
    assert ok


def test_03_haar_monte_carlo():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    rows = []
    for d in (2, 3, 4):
        ensembles = {"sic": fresh_sic(d).sic.ensemble, "random5": random_ensemble(d, 5, rng)}
        if d in (2, 3):
            ensembles["mub"] = mub_ensemble(mub_construct(d))
        for name, ens in ensembles.items():
            r = haar_average_fidelity(ens, MonteCarloConfig(100_000, seed=SEED + 10 * d))
            rows.append((d, name, r, consistent_with(r, 2 / (d + 1), 3.0)))
    elapsed = time.perf_counter() - t0
    ok = all(r[3] for r in rows) and elapsed < 120
    worst = max(abs(r.value - 2 / (d + 1)) / max(r.stderr, 1e-300) for d, _, r, _ in rows
                if r.stderr > 1e-12)
    record(3, ok, f"Haar MC within 3 s.e. of 2/(d+1), d=2,3,4 x {{SIC, MUB, random}}: "
                  f"{sum(r[3] for r in rows)}/{len(rows)} pass, worst random-ensemble "
                  f"z={worst:.2f}, {elapsed:.1f}s (< 120s)")
    assert ok


def test_04_closed_form_exact():
    ok = all(haar_integral_factorial(d) == Fraction(2, d + 1)
             and haar_integral_closed_form(d) == float(haar_integral_factorial(d))
             for d in range(1, 21))
    record(4, ok, "factorial form equals 2/(d+1) exactly for d=1..20")
    assert ok


def test_05_simple_reconstruction_optimal():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for d in (2, 3, 4):
        ens = fresh_sic(d).sic.ensemble
        for _ in range(50):
            g = random_povm(d, rng)
            avg = average_fidelity(ens, g, projective_reproduction(g)).value
            worst = max(worst, abs(avg - achievable_fidelity(ens, g).value))
    ok = worst < 1e-10
    record(5, ok, f"projective reproduction attains achievable fidelity, d=2,3,4, 50 POVMs: "
                  f"max gap {worst:.2e} (< 1e-10)")
    assert ok


def test_06_sic_certification():
    t0 = time.perf_counter()
    rows = []
    for d in range(2, 9):
        res = find_fiducial(FiducialSearchConfig(d, seed=SEED))
        cert = verify_sic(res.sic)
        pot = frame_potential(res.sic.kets)
        rows.append(res.success and pot < 1e-16 and cert.overlap_residual < 1e-9
                    and cert.gram_rank == d * d)
    elapsed = time.perf_counter() - t0
    ok = all(rows) and elapsed < 300
    record(6, ok, f"fiducial search d=2..8: {sum(rows)}/7 with potential < 1e-16, "
                  f"residual < 1e-9, Gram rank d^2; {elapsed:.1f}s (< 300s)")
    assert ok


def test_07_informational_completeness():
    rng = np.random.default_rng(SEED + 7)
    round_trip = purity = collision = 0.0
    for d in (2, 3, 4):
        s = fresh_sic(d).sic
        for _ in range(100):
            rho = random_density(d, rng, int(rng.integers(1, d + 1)))
            p = sic_probabilities(s, rho)
            round_trip = max(round_trip, operator_norm(reconstruct_density(s, p) - rho))
            purity = max(purity, abs(purity_from_probabilities(d, p) - np.trace(rho @ rho).real))
            q = sic_probabilities(s, projector(haar_random_state(d, rng)))
            collision = max(collision, abs(np.sum(q * q) - 2 / (d * (d + 1))))
    ok = max(round_trip, purity, collision) < 1e-10
    record(7, ok, f"SIC tomography d=2,3,4 x 100 states: round trip {round_trip:.1e}, "
                  f"purity {purity:.1e}, pure-state sum p^2 {collision:.1e} (all < 1e-10)")
    assert ok


def test_08_mub_suite():
    worst = 0.0
    for d in (2, 3, 5, 7):
        m = mub_construct(d)
        r = mub_residuals(m)
        cmp = maps_equal(ensemble_map_of(mub_ensemble(m)), PhiMap(d))
        worst = max(worst, r.intra, r.inter, cmp.residual)
    ok = worst < 1e-10
    record(8, ok, f"MUBs d=2,3,5,7: overlap and map residuals {worst:.2e} (< 1e-10)")
    assert ok


def test_09_decomposition_uniqueness():
    rng = np.random.default_rng(SEED + 9)
    eps = 1e-3
    checks = []
    min_perturbed = np.inf
    for d in (2, 3, 4):
        s = fresh_sic(d).sic
        r = sic_uniqueness_check(s.ensemble)
        checks.append(r.map_equal and r.is_sic is True)

        probs = np.full(d * d, 1 / d ** 2)
        probs[0] += eps
        probs[1] -= eps
        r_w = sic_uniqueness_check(Ensemble(s.kets, probs))

        kets = s.kets.copy()
        kets[0, 1] += eps
        kets[0] /= np.linalg.norm(kets[0])
        r_s = sic_uniqueness_check(Ensemble.uniform(kets))
        for r_p in (r_w, r_s):
            checks.append(not r_p.map_equal)
            min_perturbed = min(min_perturbed, r_p.map_residual)

        few = sic_uniqueness_check(random_ensemble(d, d * d - 1, rng))
        checks.append(few.impossible and not few.map_equal)
    ok = all(checks) and min_perturbed > 1e-5
    record(9, ok, f"SIC passes uniqueness check; perturbed variants min residual "
                  f"{min_perturbed:.2e} (> 1e-5); sub-d^2 candidates reported impossible")
    assert ok


def test_10_composite_gap(capsys):
    t0 = time.perf_counter()
    code = main(["--json", "gap", "2", "2", "--seed", str(SEED)])
    r = json.loads(capsys.readouterr().out)["results"][0]
    elapsed = time.perf_counter() - t0
    ok = (code == 0
          and abs(r["product_value"] - 4 / 9) < 1e-12
          and abs(r["composite_quantumness"] - 2 / 5) < 1e-12
          and abs(r["gap"] - 2 / 45) < 1e-12
          and abs(r["composite_sic_fidelity"] - 2 / 5) < 1e-9
          and r["optimizer_value"] >= 0.44
          and elapsed < 300)
    record(10, ok, f"gap 2 2: product {r['product_value']:.12f}, Q_comp "
                   f"{r['composite_quantumness']:.12f}, gap {r['gap']:.12f}, composite SIC "
                   f"{r['composite_sic_fidelity']:.12f}, optimizer {r['optimizer_value']:.6f} "
                   f"(>= 0.44), {elapsed:.1f}s")
    assert ok


def test_11_optimizer_sanity():
    rng = np.random.default_rng(SEED + 11)
    checks = []
    for k in range(20):
        ens = random_ensemble(2, int(rng.integers(1, 7)), rng)
        found = accessible_fidelity_search(ens, PovmSearchConfig(seed=SEED + k)).value
        sampled = max(achievable_fidelity(ens, random_rank_one_povm(2, int(rng.integers(2, 5)),
                                                                    rng)).value
                      for _ in range(200))
        checks.append((found >= sampled - 1e-12, found >= 2 / 3 - 1e-6, found <= 1 + 1e-9))
    ok = all(all(c) for c in checks)
    record(11, ok, f"optimizer on 20 random qubit ensembles: "
                   f"{sum(all(c) for c in checks)}/20 beat 200 random POVMs, "
                   f">= 2/3 - 1e-6 and <= 1 + 1e-9")
    assert ok


def test_12_depolarizing_identity():
    rng = np.random.default_rng(SEED + 12)
    worst = max(depolarizing_consistency(d, random_density(d, rng, int(rng.integers(1, d + 1))))
                for d in range(2, 7) for _ in range(100))
    ok = worst < 1e-12
    record(12, ok, f"closed form equals scaled depolarizing channel, d=2..6 x 100: "
                   f"residual {worst:.2e} (< 1e-12)")
    assert ok
