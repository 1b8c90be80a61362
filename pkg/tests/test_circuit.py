import numpy as np
import pytest

from spinglue.chain import SZ, SupportInterval, embed_operator, tfim_family
from spinglue.circuit import (CircuitTooLargeError, Observable, apply_circuit_dense,
                              fidelity, light_cone_stages, local_expectation,
                              min_phase_distance)
from spinglue.gluing import EngineParams, GluingStage, LocalCircuit, glue_once, split

from conftest import haar_unitary, random_hermitian, random_state

FAMILY = tfim_family()


def random_circuit(rng, max_sites=12):
    m = int(rng.integers(1, 4))
    copies = 2 ** int(rng.integers(1, 4))
    while m * copies > max_sites:
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
    return LocalCircuit(base_block_state=base, copies=copies, stages=tuple(stages))


class TestApplyCircuitDense:
    def test_no_stages_is_product(self, rng):
        base = random_state(rng, 2)
        circ = LocalCircuit(base_block_state=base, copies=2, stages=())
        assert np.allclose(apply_circuit_dense(circ), np.kron(base, base))

    def test_identity_stage_is_noop(self, rng):
        base = random_state(rng, 2)
        stage = GluingStage(level=1, block_size=2, alpha=None, gamma=1.0,
                            unitary=np.eye(4), support=SupportInterval(1, 2))
        circ = LocalCircuit(base_block_state=base, copies=2, stages=(stage,))
        assert np.allclose(apply_circuit_dense(circ), np.kron(base, base))

    def test_norm_preserved(self, rng):
        circ = random_circuit(rng)
        assert abs(np.linalg.norm(apply_circuit_dense(circ)) - 1.0) < 1e-9

    def test_matches_glue_once_internal_state(self):
        sp = split(FAMILY(4), 2)
        stage = glue_once(sp, EngineParams(gamma=20.0, steps=48))
        circ = LocalCircuit(base_block_state=sp.omega_a, copies=2, stages=(stage,))
        psi = apply_circuit_dense(circ)
        assert abs(abs(np.vdot(sp.omega_h, psi)) - stage.fidelity_vs_exact) < 1e-10

    def test_cap_refused(self, rng):
        base = random_state(rng, 2)
        circ = LocalCircuit(base_block_state=base, copies=4, stages=())
        with pytest.raises(CircuitTooLargeError):
            apply_circuit_dense(circ, cap=6)


class TestLocalExpectation:
    def test_identity_observable(self, rng):
        circ = random_circuit(rng)
        obs = Observable(matrix=np.eye(2), support=SupportInterval(0, 0))
        assert abs(local_expectation(circ, obs) - 1.0) < 1e-10

    def test_matches_dense_on_random_circuits(self, rng):
        for _ in range(12):
            circ = random_circuit(rng)
            n = circ.n
            w = int(rng.integers(1, min(3, n) + 1))
            lo = int(rng.integers(0, n - w + 1))
            mat = random_hermitian(rng, 2 ** w)
            obs = Observable(matrix=mat, support=SupportInterval(lo, lo + w - 1))
            psi = apply_circuit_dense(circ)
            dense_val = float(np.real(np.vdot(psi, embed_operator(mat, obs.support, n) @ psi)))
            assert abs(local_expectation(circ, obs) - dense_val) < 1e-10

    def test_disconnected_observable_sees_bare_block(self, rng):
        # the stage lives in the right block; an observable on site 0 never
        # meets its cone and must reproduce the bare block expectation
        base = random_state(rng, 3)
        stage = GluingStage(level=1, block_size=3, alpha=None, gamma=1.0,
                            unitary=haar_unitary(rng, 4), support=SupportInterval(4, 5))
        circ = LocalCircuit(base_block_state=base, copies=2, stages=(stage,))
        obs = Observable(matrix=SZ, support=SupportInterval(0, 0))
        got = local_expectation(circ, obs)
        t = base.reshape(2, 4)
        rho0 = np.einsum("ir,jr->ij", t, t.conj())
        bare = float(np.real(np.trace(SZ @ rho0)))
        assert abs(got - bare) < 1e-10

    def test_light_cone_marks_exactly_the_connected_stages(self, rng):
        def mk(lo, hi, lvl):
            return GluingStage(level=lvl, block_size=1, alpha=None, gamma=1.0,
                               unitary=haar_unitary(rng, 2 ** (hi - lo + 1)),
                               support=SupportInterval(lo, hi))

        stages = (mk(0, 1, 1), mk(2, 3, 1), mk(1, 2, 2), mk(6, 7, 3))
        circ = LocalCircuit(base_block_state=random_state(rng, 1), copies=8,
                            stages=stages)
        # site 0 connects only to the first stage
        marked, _ = light_cone_stages(circ, SupportInterval(0, 0))
        assert marked == [0]
        # site 2 walks back through the bridge and both level-1 stages
        marked, cone = light_cone_stages(circ, SupportInterval(2, 2))
        assert marked == [0, 1, 2]
        assert (cone.lo, cone.hi) == (0, 3)
        # site 5 is causally disconnected from every stage
        marked, _ = light_cone_stages(circ, SupportInterval(5, 5))
        assert marked == []

    def test_non_hermitian_observable_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            Observable(matrix=np.array([[0, 1], [0, 0]], dtype=complex),
                       support=SupportInterval(0, 0))


class TestFidelity:
    def test_self_fidelity(self, rng):
        a = random_state(rng, 3)
        assert abs(fidelity(a, a) - 1.0) < 1e-12

    def test_orthogonal_states(self):
        a = np.array([1, 0, 0, 0], dtype=complex)
        b = np.array([0, 1, 0, 0], dtype=complex)
        assert fidelity(a, b) == 0.0

    def test_phase_invariance(self, rng):
        a = random_state(rng, 2)
        b = np.exp(1j * 0.7) * a
        assert abs(fidelity(a, b) - 1.0) < 1e-12
        assert min_phase_distance(a, b) < 1e-6

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError, match="dimensions"):
            fidelity(random_state(rng, 2), random_state(rng, 3))
