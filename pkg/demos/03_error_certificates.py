"""Certify quasi-adiabatic transport errors a priori: the product of the
drive strength eta* and the filtered resolvent peak f* bounds the measured
error at every filter width, and the measured error falls off Gaussian-fast
in gamma^2 until it hits the integrator floor.
"""

import numpy as np

from spinglue import (error_certificate, linear_path, make_filter,
                      measure_transport_error, transverse_field_ising)

n = 3
path = linear_path(transverse_field_ising(n, field=1.5, shift_ground_to_zero=False),
                   transverse_field_ising(n, field=2.5, shift_ground_to_zero=False))
grid = np.linspace(0, 1, 101)

print(f"{'gamma':>6} {'eta*':>9} {'f*':>12} {'bound':>12} {'measured':>12} {'ok':>4}")
rows = []
for gamma in (0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0):
    filt = make_filter("gaussian", gamma)
    cert = error_certificate(path, filt, grid)
    measured = measure_transport_error(path, filt, steps=256, order="richardson")
    ok = measured <= cert.bound + 1e-7
    rows.append((gamma, measured))
    print(f"{gamma:6.2f} {cert.eta_star:9.4f} {cert.f_star:12.3e} "
          f"{cert.bound:12.3e} {measured:12.3e} {'yes' if ok else 'NO':>4}")

g2 = np.array([g * g for g, _ in rows])
slope = np.polyfit(g2, np.log([m for _, m in rows]), 1)[0]
print(f"\nfitted slope of log(measured) vs gamma^2: {slope:.2f} (negative =")
print("Gaussian tail suppression of everything above the gap)")
print("\nThe certificate also records the closed-form Gaussian value quoted")
print("for the alternative transform normalization; the bound itself always")
print("uses the transform measured from the time-domain filter.")
