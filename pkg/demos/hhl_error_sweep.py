"""
Low-precision matrix inversion
==============================

Phase estimation with m ancilla qubits reads eigenvalues of A to m bits,
a uniformly controlled rotation writes 1/k amplitudes, and everything is
uncomputed. The error against the exact normalized solution shrinks as m
grows and creeps up with the matrix size.
"""

import sys

import numpy as np

from ses_forge import hhl, total_duration

inst = hhl.exact_phase_instance(4, 3, [1, 3, 5, 6], np.random.default_rng(0))
res = hhl.run_hhl(inst)
print(f"exact phases: E = {res.e_algorithm:.1e}, p(postselect) = {res.p_postselect:.3f}")

seed = 7
for m in (2, 3):
    print(f"m = {m}")
    for row in hhl.sweep_fig7(range(2, 11), m, 100, seed):
        print(f"  n = {row.n:2d}  E = {row.mean_e_algorithm:.3f} +- {row.stderr:.3f}  p = {row.mean_p_postselect:.2f}")

# The same instance on the device: every controlled evolution goes through
# the dual-state protocol.
inst = hhl.random_instance(3, 2, np.random.default_rng(1))
a = hhl.run_hhl(inst)
d = hhl.run_hhl(inst, "two_level_device")
print(f"abstract E = {a.e_algorithm:.4f}, device E = {d.e_algorithm:.4f}, schedule {d.schedule_time * 1e9:.0f} ns")

big = hhl.random_instance(10, 3, np.random.default_rng(2))
for mode in ("ideal", "pulsed"):
    t = total_duration(hhl.compile_hhl_schedule(big, cnot_mode=mode))
    print(f"n = 10, m = 3 schedule with {mode} CNOTs: {t * 1e6:.3f} us")

if "--csv" in sys.argv:
    rows = hhl.hhl_trials(range(2, 11), 3, 100, seed)
    print(",".join(hhl.TrialRow.COLUMNS))
    for r in rows:
        print(",".join("" if v is None else repr(v) for v in (r.n, r.m, r.trial, r.e_algorithm, r.p_postselect, r.schedule_time_s)))
