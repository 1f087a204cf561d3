"""
Simultaneous multi-target CNOT
==============================

Coupling one driven ancilla to every data qubit gives the collective
entangler exp(-i pi/4 S_x X_a). The gate time must hold a whole number of
carrier periods and the Rabi frequency a whole number of half cycles.
"""

from ses_forge.compiler import EntanglerParams
from ses_forge.simulator import REFERENCE_CNOT_ROWS, cnot_gate_error, table_orderings

p = EntanglerParams.from_timing(3, 30e-9)
print(f"l_a = {p.l_a}, Omega = {p.omega / 1e6:.1f} MHz, g = {p.g / 1e6:.2f} MHz")

# Two-level model: the error left by the second rotating-frame
# approximation falls off with the number of Rabi cycles.
for lb in (1, 2, 4, 10):
    e = cnot_gate_error(EntanglerParams.from_timing(3, 30e-9, l_b=lb), levels=2).e_gate
    print(f"two-level, l_b = {lb:2d}: E_gate = {e:.4f}")

# Three-level transmons: leakage through |2> now dominates.
rows = []
print(" n  eta(MHz)  t(ns)  E_gate  reference")
for n, eta, t_gate, ref in REFERENCE_CNOT_ROWS:
    rep = cnot_gate_error(EntanglerParams.from_timing(n, t_gate, eta=eta))
    rows.append(rep.row())
    print(f"{n:2d}  {eta / 1e6:8.0f}  {t_gate * 1e9:5.0f}  {rep.e_gate:.3f}   {ref:.3f}")

for text, ok in table_orderings(rows):
    print("ok " if ok else "BAD", text)
