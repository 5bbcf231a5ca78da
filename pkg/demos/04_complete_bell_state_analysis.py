"""Complete analysis of the 16 hyperentangled Bell states.

Step one records the spatial-mode information on two quantum-dot spins
without touching the photons: QD1 learns whether the spatial state is
even or odd parity, QD2 (after a beam-splitter basis change) whether
its phase is + or -. Step two measures each photon with a c-PBS and two
PBSs -- a single-photon Bell-state measurement. Because the spatial
state is already known, the 16 detector patterns resolve the
polarization state completely: 16/16 states distinguished.
"""

from hyperbell import CavityParams, reflection_coefficients, run_hbsa
from hyperbell.protocols import all_labels, classification_table

print("=== ideal run for every basis input ===")
for label in all_labels():
    branches = run_hbsa(label)
    patterns = ", ".join(f"{b.pattern.a}&{b.pattern.b}" for b in branches)
    ok = all(b.classified == label for b in branches)
    print(f"{str(label):12s} -> spins ({branches[0].spins.e1},{branches[0].spins.e2})"
          f"  patterns [{patterns}]  {'all classified correctly' if ok else 'ERROR'}")
print()

print("=== the derived classification map (first rows) ===")
print("e1 e2 | detectors  | state")
for spins, pattern, label in classification_table()[:8]:
    print(f"{spins.e1:2s} {spins.e2:2s} | {pattern.a:4s} {pattern.b:4s} | {label}")
print(f"... 64 rows total; `hyperbell classify-table` prints them all.")
print()

print("=== a lossy run: which fraction still classifies correctly? ===")
pair = reflection_coefficients(CavityParams(g=1.0, kappa_s=0.2, gamma=0.1))
for label in all_labels()[:4]:
    branches = run_hbsa(label, pair)
    total = sum(b.probability for b in branches)
    good = sum(b.probability for b in branches if b.classified == label)
    print(f"{str(label):12s} survival {total:.4f}, accuracy {good / total:.6f}")
print()
print("Errors come only from the unheralded leak component of the gate")
print("arms; the surviving unleaked amplitude classifies perfectly.")
