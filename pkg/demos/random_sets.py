"""
Random sets with a fixed density
================================

Each point of F_3^9 joins the set with probability 0.3.  Progression
densities along a few shifts should sit near 0.3^3 within a few exact
standard deviations.
"""
from hpx import delta_k_experiment

rep = delta_k_experiment(3, 3, 0.3, 9, seed=7)
print(f"density {rep.densities[0]['empirical']:.4f} (target 0.3)")
for r in rep.rows:
    print(f"shift rank {r.shift:3d}: {r.empirical:.5f} vs {r.target:.5f}  z = {r.z:+.2f}")
print("all within 4 sigma:", rep.passed)

# 20 seeds, as in the acceptance suite
ok = sum(delta_k_experiment(3, 3, 0.3, 9, seed=s).passed for s in range(20))
print(f"{ok}/20 seeds pass")
