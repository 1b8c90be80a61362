"""Iterate the gluing step over doubling block sizes: 2 -> 4 -> 8 sites.

The result is a local-circuit representation of the 8-site ground state:
one seam unitary per gluing, applied to a tensor power of the 2-site block
ground state. Local observables are then evaluated by contracting only the
stages inside their reverse light cone.
"""

import numpy as np

from spinglue import tfim_family
from spinglue.chain import SZ, SupportInterval
from spinglue.circuit import Observable, apply_circuit_dense, local_expectation
from spinglue.exact import require_unique_ground
from spinglue.gluing import EngineParams, iterate_gluing, save_circuit, load_circuit


def main():
    family = tfim_family()
    engine = EngineParams(gamma=20.0, steps=32, order="midpoint")
    circuit = iterate_gluing(family, 2, 8, engine,
                             lr_constants={"kappa_lr": 9.1, "v": 2.8})

    print("doubling recursion m=2 -> n=8:")
    for rep in circuit.level_reports:
        print(f"  level {rep.level}: {rep.block_size}+{rep.block_size} sites, "
              f"x = {rep.x_used:.5f}, gap = {rep.delta_e:.4f}, "
              f"block fidelity = {rep.stage_fidelity:.10f}")
    print(f"stages (application order): "
          f"{[(s.level, (s.support.lo, s.support.hi)) for s in circuit.stages]}")
    print(f"final fidelity vs exact Omega_8: {circuit.final_fidelity:.12f}")

    omega8 = require_unique_ground(family(8)).ground_state
    psi = apply_circuit_dense(circuit)
    print(f"dense rebuild overlap check:     {abs(np.vdot(psi, omega8)):.12f}")

    print("\nlocal observables through the light cone vs the exact state:")
    for site in (0, 3, 7):
        obs = Observable(matrix=SZ, support=SupportInterval(site, site))
        approx = local_expectation(circuit, obs)
        exact = float(np.real(np.vdot(omega8, np.kron(np.kron(
            np.eye(2 ** site), SZ), np.eye(2 ** (7 - site))) @ omega8)))
        print(f"  <sz_{site}>: circuit {approx:+.8f}   exact {exact:+.8f}")

    path = "/tmp/tfim8_circuit.json"
    save_circuit(circuit, path)
    back = load_circuit(path)
    print(f"\ncircuit serialized to {path} and read back: "
          f"{len(back.stages)} stages, {back.copies} copies of {back.m} sites")


if __name__ == "__main__":
    main()
