"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured numbers (run with `pytest -s tests/test_acceptance.py` to see
them). Thresholds marked "frozen" were measured once in pilot runs with the
full-width generator at the reference parameters and are asserted as
regression constants.
"""

import json
import time

import numpy as np
import pytest

from spinglue.adiabatic import (error_certificate, ground_state_path, linear_path,
                                measure_transport_error, qa_generator_quadrature,
                                qa_generator_spectral, evolve_path, transport_state)
from spinglue.chain import (SupportInterval, embed_operator, spectral_norm,
                            tfim_family, transverse_field_ising)
from spinglue.circuit import Observable, apply_circuit_dense, local_expectation
from spinglue.cli import main as cli_main
from spinglue.exact import eigendecompose
from spinglue.filters import cached_filter, make_filter
from spinglue.gluing import (EngineParams, build_ancilla_path,
                             effective_two_level, glue_once, iterate_gluing, split,
                             truncated_sweep_path, truncation_distance,
                             embed_ancilla_window)
from spinglue.lieb_robinson import (SATURATION_NORM, fit_lr_constants,
                                    lr_commutator_scan, synthetic_samples)

from conftest import haar_unitary, random_hermitian, random_state

FAMILY = tfim_family()

# frozen pilot constants
GLUE_GAMMA_FACTOR = 16.0          # gamma = 16 / (x dE) keeps ancilla weight > 0.9999
GLUE_FIDELITY_FLOOR = 0.999       # measured 1 - 3e-12 at the reference point
ITERATE_FIDELITY_FLOOR = 0.999    # measured 1 - 2e-12 for m=2 -> n=8
STANDARD_GAMMA_FACTORS = (6.0, 8.0, 10.0, 13.0, 16.0, 20.0)
STANDARD_ALPHAS = (1, 2, 3, None)
LR_CONSTANTS = {"kappa_lr": 9.1, "v": 2.8}


def announce(criterion, detail, elapsed, limit):
    print(f"\nACCEPTANCE PASS criterion {criterion}: {detail} "
          f"[{elapsed:.1f}s < {limit}s]")
    assert elapsed < limit


def tfim_ramp(n, h0=1.5, h1=2.5):
    return linear_path(transverse_field_ising(n, field=h0, shift_ground_to_zero=False),
                       transverse_field_ising(n, field=h1, shift_ground_to_zero=False))


def test_criterion_1_generator_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 4):
        path = tfim_ramp(n)
        for gamma in (0.5, 2.0, 8.0):
            filt = cached_filter("gaussian", gamma)
            k_spec = qa_generator_spectral(path, 0.5, filt)
            nodes = max(4001, int(2600 * gamma))
            k_quad = qa_generator_quadrature(path, 0.5, filt, t_cut=8.0 * gamma,
                                             n_nodes=nodes)
            worst = max(worst, spectral_norm(k_spec - k_quad))
    assert worst < 1e-6
    announce(1, f"spectral vs quadrature generators agree to {worst:.2e} "
                "on n in {2,3,4}, gamma in {0.5,2,8}", time.perf_counter() - start, 10.0)


def test_criterion_2_exact_adiabatic_recovery():
    start = time.perf_counter()
    path = tfim_ramp(3)
    gaps = [eigendecompose(path.h(s)).gap for s in np.linspace(0, 1, 21)]
    gamma = 0.9 * min(gaps)
    filt = make_filter("compact_bump", gamma)
    refs = ground_state_path(path, np.linspace(0, 1, 129))
    last = None
    for steps in (16, 32, 64):
        psi = transport_state(lambda s: qa_generator_spectral(path, s, filt),
                              refs[0], steps, order="richardson")
        infid = 1.0 - abs(np.vdot(psi, refs[-1]))
        if last is not None and abs(infid - last) < 1e-9:
            break
        last = infid
    assert infid < 1e-6
    announce(2, f"compact-bump transport infidelity {infid:.2e} at {steps} steps "
                f"(gamma={gamma:.3f} < gap={min(gaps):.3f})",
             time.perf_counter() - start, 30.0)


def test_criterion_3_certified_error_domination():
    start = time.perf_counter()
    path = tfim_ramp(3)
    grid = np.linspace(0.0, 1.0, 101)
    gammas = (0.75, 1.0, 1.25, 1.5, 2.0, 2.5)
    assert len(gammas) >= 6
    measured_all = []
    for gamma in gammas:
        filt = cached_filter("gaussian", gamma)
        cert = error_certificate(path, filt, grid)
        measured = measure_transport_error(path, filt, steps=256,
                                           order="richardson", ref_points=257)
        assert measured <= cert.bound + 1e-7, (gamma, measured, cert.bound)
        measured_all.append(measured)
    slope = np.polyfit(np.square(gammas), np.log(measured_all), 1)[0]
    assert slope < 0.0
    announce(3, f"measured error below eta* f* on all {len(gammas)} gammas; "
                f"log-error vs gamma^2 slope {slope:.2f} < 0",
             time.perf_counter() - start, 60.0)


def test_criterion_4_two_level_gap_law():
    start = time.perf_counter()
    sp = split(FAMILY(4), 2)
    path = build_ancilla_path(sp)
    x = abs(path.x_used)
    dec = eigendecompose(path.m_of_theta(np.pi / 4))
    doublet_gap = dec.energies[1] - dec.energies[0]
    _, model_gap = effective_two_level(path.x_used, np.pi / 4)
    assert abs(model_gap - x) < 1e-12
    rel = abs(doublet_gap - path.kappa * x) / (path.kappa * x)
    assert rel < 0.05
    announce(4, f"doublet gap {doublet_gap:.6f} vs kappa|x| {path.kappa * x:.6f} "
                f"({100 * rel:.3f}% off, tol 5%)", time.perf_counter() - start, 5.0)


def test_criterion_5_gluing_fidelity():
    start = time.perf_counter()
    sp = split(FAMILY(4), 2)
    path = build_ancilla_path(sp)
    x = abs(path.x_used)
    de = min(sp.gap_h, sp.gap_k)
    gamma_ref = GLUE_GAMMA_FACTOR / (x * de)

    stage = glue_once(sp, EngineParams(gamma=gamma_ref, steps=64), ancilla_path=path)
    assert stage.fidelity_vs_exact >= GLUE_FIDELITY_FLOOR

    circuit = iterate_gluing(FAMILY, 2, 8,
                             EngineParams(gamma=20.0, steps=32, order="midpoint"),
                             lr_constants=LR_CONSTANTS)
    assert circuit.final_fidelity >= ITERATE_FIDELITY_FLOOR

    gamma_fids = []
    for factor in STANDARD_GAMMA_FACTORS:
        st = glue_once(sp, EngineParams(gamma=factor / (x * de), steps=48),
                       ancilla_path=path)
        gamma_fids.append(st.fidelity_vs_exact)
    assert all(b >= a - 1e-7 for a, b in zip(gamma_fids, gamma_fids[1:]))

    sp8 = split(FAMILY(8), 4)
    path8 = build_ancilla_path(sp8)
    gamma8 = GLUE_GAMMA_FACTOR / (abs(path8.x_used) * min(sp8.gap_h, sp8.gap_k))
    alpha_fids = []
    for alpha in STANDARD_ALPHAS:
        st = glue_once(sp8, EngineParams(gamma=gamma8, alpha=alpha, steps=32,
                                         order="midpoint"), ancilla_path=path8)
        alpha_fids.append(st.fidelity_vs_exact)
    assert all(b >= a - 1e-7 for a, b in zip(alpha_fids, alpha_fids[1:]))

    announce(5, f"glue fidelity {stage.fidelity_vs_exact:.6f} >= {GLUE_FIDELITY_FLOOR}, "
                f"doubling fidelity {circuit.final_fidelity:.6f} >= {ITERATE_FIDELITY_FLOOR}, "
                f"monotone over gammas {np.round(gamma_fids, 6).tolist()} "
                f"and alphas {np.round(alpha_fids, 6).tolist()}",
             time.perf_counter() - start, 120.0)


def test_criterion_6_truncation_decay():
    start = time.perf_counter()
    gamma = 2.0
    sp = split(FAMILY(6), 3)
    path = build_ancilla_path(sp)
    s_grid = np.linspace(0.0, 1.0, 9)
    alphas = (1, 2, 3)
    table = truncation_distance(sp, s_grid, gamma, alphas, ancilla_path=path)

    diffs = np.diff(table.distances, axis=1)
    assert np.all(diffs < 1e-9)

    mean_dist = table.distances.mean(axis=0)
    tail = [(a, d) for a, d in zip(alphas, mean_dist) if a >= gamma]
    slope = np.polyfit([a for a, _ in tail], [np.log(max(d, 1e-300)) for _, d in tail], 1)[0]
    assert slope < 0.0

    filt = cached_filter("gaussian", gamma)
    u_full = evolve_path(lambda s: qa_generator_spectral(path.as_path(), s, filt),
                         64, order="richardson")
    bounds = table.integral_over_s()
    for j, alpha in enumerate(alphas):
        sub_path, window = truncated_sweep_path(path, alpha)
        u_sub = evolve_path(lambda s: qa_generator_spectral(sub_path, s, filt),
                            64, order="richardson")
        u_alpha = embed_ancilla_window(u_sub, window, sp.n)
        dist = spectral_norm(u_full - u_alpha)
        assert dist <= bounds[j] + 1e-9, (alpha, dist, bounds[j])

    announce(6, f"||k - k_alpha|| nonincreasing, log-slope {slope:.1f} < 0 beyond "
                f"alpha >= gamma, unitary distances within integral bounds "
                f"{np.round(bounds, 4).tolist()}", time.perf_counter() - start, 120.0)


def test_criterion_7_lieb_robinson():
    start = time.perf_counter()
    h = transverse_field_ising(8, shift_ground_to_zero=False)
    samples = lr_commutator_scan(h, 0, (0, 0),
                                 [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6],
                                 [1, 2, 3, 4, 5, 7])
    zeros = [s for s in samples if s.t == 0.0]
    assert zeros and all(s.commutator_norm == 0.0 for s in zeros)

    fit = fit_lr_constants(samples)
    pre = [s for s in samples if 0.0 < s.commutator_norm < SATURATION_NORM]
    assert pre
    for s in pre:
        assert fit.bound(s.t, s.distance, inflation=0.1) >= s.commutator_norm

    syn = synthetic_samples(v=1.3, kappa=2.7, amplitude=2.0,
                            t_grid=[0.05, 0.1, 0.2, 0.4], d_grid=[1, 2, 3, 4])
    refit = fit_lr_constants(syn, saturation=np.inf, fit_floor_ratio=0.0)
    assert abs(refit.v - 1.3) < 1e-6 and abs(refit.kappa_lr - 2.7) < 1e-6

    announce(7, f"t=0 norms vanish, inflated bound dominates {len(pre)} pre-saturation "
                f"samples (v={fit.v:.2f}, kappa={fit.kappa_lr:.2f}), synthetic "
                f"round-trip exact", time.perf_counter() - start, 60.0)


def test_criterion_8_representation_consistency(rng):
    start = time.perf_counter()
    from spinglue.gluing import GluingStage, LocalCircuit

    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 4))
        copies = 2 ** int(rng.integers(1, 4))
        while m * copies > 12:
            copies //= 2
        copies = max(copies, 2)
        n = m * copies
        base = random_state(rng, m)
        stages = []
        for _ in range(int(rng.integers(0, 5))):
            w = int(rng.integers(1, min(4, n) + 1))
            lo = int(rng.integers(0, n - w + 1))
            stages.append(GluingStage(level=1, block_size=m, alpha=None, gamma=1.0,
                                      unitary=haar_unitary(rng, 2 ** w),
                                      support=SupportInterval(lo, lo + w - 1)))
        circ = LocalCircuit(base_block_state=base, copies=copies, stages=tuple(stages))
        w = int(rng.integers(1, min(3, n) + 1))
        lo = int(rng.integers(0, n - w + 1))
        mat = random_hermitian(rng, 2 ** w)
        obs = Observable(matrix=mat, support=SupportInterval(lo, lo + w - 1))
        psi = apply_circuit_dense(circ)
        dense_val = float(np.real(np.vdot(psi, embed_operator(mat, obs.support, n) @ psi)))
        worst = max(worst, abs(local_expectation(circ, obs) - dense_val))
    assert worst < 1e-10
    announce(8, f"light-cone expectation matches dense evaluation to {worst:.2e} "
                "on 50 random circuits", time.perf_counter() - start, 60.0)


DETERMINISM_CONFIG = """
seed = 11
[model]
kind = "tfim"
boundary = "uniform"
[geometry]
m = 2
n = 4
[engine]
gamma_grid = [16.0, 20.0]
alpha_grid = [0, 1]
steps = 32
order = "midpoint"
"""


def test_criterion_9_determinism(tmp_path):
    start = time.perf_counter()
    cfg = tmp_path / "exp.toml"
    cfg.write_text(DETERMINISM_CONFIG, encoding="utf-8")
    outs = []
    for name in ("run1", "run2"):
        out = tmp_path / name
        assert cli_main(["glue", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append((out / "results.csv").read_bytes())
    assert outs[0] == outs[1]
    meta = json.loads((tmp_path / "run1" / "metadata.json").read_text())
    announce(9, f"two glue runs produced byte-identical CSV bodies "
                f"({len(outs[0])} bytes, config {meta['config_hash']})",
             time.perf_counter() - start, 120.0)
