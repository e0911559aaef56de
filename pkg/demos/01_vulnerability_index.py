"""Walk through the vulnerability index: scale, weighted sum, normalization.

Each of the 11 structural parameters gets a class A (best) to D (worst) during
the field survey. The index is the weighted sum of the class values; dividing
by the scale maximum over 100 yields the 0-100 normalized index used by the
damage functions and the classification bands.

Run:  python3 demos/01_vulnerability_index.py
"""

from vulnesis import DEFAULT_SCALE, VULNERABILITY_LEVELS, classify, compute_vi, normalize_vi

print("The default 11-parameter scale:")
print(f"{'#':>2}  {'parameter':<38} {'A':>4} {'B':>4} {'C':>4} {'D':>4} {'W':>5}")
for i, row in enumerate(DEFAULT_SCALE.rows, start=1):
    print(f"{i:>2}  {row.name:<38} {row.k['A']:>4.0f} {row.k['B']:>4.0f}"
          f" {row.k['C']:>4.0f} {row.k['D']:>4.0f} {row.w:>5.2f}")
print(f"\nscale maximum (all parameters class D): {DEFAULT_SCALE.max_vi()}")

# a confined-masonry house in decent shape, weak on plan configuration
survey = tuple("ABABBCABBAB")
vi = compute_vi(survey, DEFAULT_SCALE)
vi_norm = normalize_vi(vi, DEFAULT_SCALE)
print(f"\nsurvey classes:   {''.join(survey)}")
print(f"index:            {vi:.2f}")
print(f"normalized 0-100: {vi_norm:.2f}")

level = classify(vi_norm, (33.3, 66.6), VULNERABILITY_LEVELS)
print(f"vulnerability:    {level.name} (band thresholds 33.3 / 66.6)")

print("\nextremes:")
for classes in ("A" * 11, "D" * 11):
    vi = compute_vi(tuple(classes), DEFAULT_SCALE)
    print(f"  all {classes[0]}: vi={vi:>6.1f}  vi_norm={normalize_vi(vi, DEFAULT_SCALE):>6.1f}")
