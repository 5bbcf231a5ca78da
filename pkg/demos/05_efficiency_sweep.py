"""Efficiency across the physical parameter plane.

Every photon takes eight lossy passages (squared amplitudes of two
photons through two stages), so the end-to-end success probability is
|(r_h - r_o)/2|^8. The sweep verifies this formula point by point from
the full simulation and writes a CSV plus a self-contained SVG heatmap.
"""

from pathlib import Path

from hyperbell import SweepGrid, emit_csv, emit_svg_heatmap, run_sweep
from hyperbell.analysis import sweep_point

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

print("sweeping a 41 x 41 grid (kappa_s/kappa in [0,1], g/(kappa_s+kappa) "
      "in [0,2.5], gamma = 0.1 kappa) ...")
records = run_sweep(SweepGrid.regular(ks_steps=41, g_steps=41))

worst = max(abs(r.eta_simulated - r.eta_closed_form) for r in records)
print(f"max |simulated - closed form| over {len(records)} points: {worst:.2e}")
print(f"min conditional fidelity: {min(r.conditional_fidelity for r in records):.15f}")

spot = sweep_point(0.0, 1.0)
print(f"spot check g = kappa, kappa_s = 0: eta = {spot.eta_simulated:.6f}, "
      f"herald rate = {spot.herald_rate:.6f}, leak share = {spot.leakage_rate:.6f}")

csv_path = out_dir / "sweep.csv"
csv_path.write_text(emit_csv(records))
print(f"wrote {csv_path} ({csv_path.stat().st_size} bytes)")

for column in ("eta_sim", "leakage_rate"):
    svg_path = out_dir / f"sweep_{column}.svg"
    svg_path.write_text(emit_svg_heatmap(records, column))
    print(f"wrote {svg_path}")

print()
print("The heatmap shows the efficiency climbing with coupling strength and")
print("falling with side leakage, while the conditional fidelity column")
print("stays pinned at one: losses cost retries, never quality.")
