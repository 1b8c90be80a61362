"""Transport a ground state along a gapped path with the quasi-adiabatic
engine: compare the spectral and brute-force quadrature generators, then
show that a compact filter narrower than the gap reproduces exact adiabatic
following to machine precision.
"""

import numpy as np

from spinglue import (eigendecompose, linear_path, make_filter,
                      qa_generator_quadrature, qa_generator_spectral,
                      spectral_norm, transport_state, transverse_field_ising)
from spinglue.adiabatic import ground_state_path


def main():
    n = 3
    path = linear_path(transverse_field_ising(n, field=1.5, shift_ground_to_zero=False),
                       transverse_field_ising(n, field=2.5, shift_ground_to_zero=False))
    gaps = [eigendecompose(path.h(s)).gap for s in np.linspace(0, 1, 21)]
    print(f"field ramp 1.5 -> 2.5 on n={n}; min gap along path: {min(gaps):.4f}")

    print("\n1) two routes to the same generator at s = 0.5, gamma = 2")
    filt = make_filter("gaussian", 2.0)
    k_spec = qa_generator_spectral(path, 0.5, filt)
    k_quad = qa_generator_quadrature(path, 0.5, filt, t_cut=16.0, n_nodes=8001)
    print(f"   ||k_spectral - k_quadrature|| = {spectral_norm(k_spec - k_quad):.2e}")

    print("\n2) transport with a compact filter narrower than the gap")
    bump = make_filter("compact_bump", 0.9 * min(gaps))
    refs = ground_state_path(path, np.linspace(0, 1, 65))
    for steps in (8, 16, 32, 64):
        psi = transport_state(lambda s: qa_generator_spectral(path, s, bump),
                              refs[0], steps, order="richardson")
        infid = 1.0 - abs(np.vdot(psi, refs[-1]))
        print(f"   steps={steps:3d}: infidelity vs true ground state = {infid:.2e}")
    print("   only the ground state passes the filter, so the quasi-adiabatic")
    print("   flow recovers exact adiabatic dynamics up to integrator error.")


if __name__ == "__main__":
    main()
