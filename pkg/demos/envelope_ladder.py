"""
Minimal progression density along a dims ladder
===============================================

Exact minima of S^3 at each density for F_3 and F_3^2, their running
minimum, its lower convex envelope and the analytic sandwich.
"""
from hpx import pipeline_envelope, solve_cp

deltas = [i / 9 for i in range(1, 9)]
res = pipeline_envelope(3, 3, [(1,), (2,)], deltas)

print(f"C_3 = {solve_cp(3).C_p:.4f}")
print(" delta   min S^3   envelope   lower       delta^3   status")
for row in res.bounds.rows:
    print(f" {row.delta:.3f}  {row.search_value:.5f}   {row.envelope_value:.5f}   "
          f"{row.lower:.2e}   {row.upper_weak:.5f}   {row.status}")

# Small deltas break delta^3: at fixed dims the constant progressions alone
# contribute |A| / |HP|, which only vanishes as the dims grow.
for note in res.bounds.notes + res.notes:
    print("note:", note)
