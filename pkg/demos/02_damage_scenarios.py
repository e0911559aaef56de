"""Damage functions: from normalized vulnerability and ground acceleration to
the damaged proportion of a building.

Each normalized-index level has a tri-linear damage line d = slope*(a/g) -
intercept, clamped to [0, 1]: zero below the onset acceleration, total loss
above the collapse acceleration. Between the published anchor curves (every 10
index points) the coefficients interpolate linearly.

Run:  python3 demos/02_damage_scenarios.py
"""

from vulnesis import DAMAGE_CURVES, damage_bounds, damage_index

print("Published damage lines (per normalized index):")
print(f"{'vi_norm':>8} {'slope':>8} {'intercept':>10} {'onset a/g':>10} {'collapse a/g':>13}")
for curve in DAMAGE_CURVES:
    onset, collapse = damage_bounds(curve.vi_norm_anchor)
    print(f"{curve.vi_norm_anchor:>8.0f} {curve.slope:>8.4f} {curve.intercept:>10.4f}"
          f" {onset:>10.4f} {collapse:>13.4f}")

print("\nDamage sweep: rows = normalized index, columns = acceleration a/g")
ags = [0.05, 0.10, 0.15, 0.20, 0.30, 0.40]
print(f"{'vi_norm':>8} " + " ".join(f"{ag:>6.2f}" for ag in ags))
for vn in (0, 25, 50, 75, 95, 100):
    cells = " ".join(f"{damage_index(vn, ag):>6.3f}" for ag in ags)
    print(f"{vn:>8} {cells}")

print("\nWhat-if: a house at vi_norm 65 under increasing shaking")
for ag in (0.02, 0.05, 0.1, 0.2, 0.3, 0.5):
    d = damage_index(65.0, ag)
    bar = "#" * round(d * 40)
    print(f"  a/g={ag:<5} d={d:5.3f} |{bar:<40}|")
