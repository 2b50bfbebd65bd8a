"""
IP averages on a torus of F_3^2
===============================

Averages over finite sums of generators collapse onto the junta part of a
function.  Here every character is non-junta, so averages decay to zero.
"""
import numpy as np

from hpx import CharacterId, IPWindow, TranslationSystem, double_limit_average, product_formula
from hpx.ip import repeated_basis, shift_distribution, total_variation_from_uniform

p, n = 3, 2
gens = repeated_basis(n, 60)
xi = CharacterId(p, (1, 2))
for N in (5, 10, 20, 40):
    w = IPWindow(p, gens, 0, N)
    print(f"N={N:2d}  |E xi| = {abs(product_formula(xi, w)):.2e}  "
          f"TV(IP sum, uniform) = {total_variation_from_uniform(shift_distribution(w)):.2e}")

sysm = TranslationSystem.identity(p, n)
f = np.random.default_rng(0).random(p ** n)
f -= f.mean()
table = double_limit_average(f, sysm, gens, [(0, N) for N in (5, 10, 20, 40)])
for (D, N), avg in table.items():
    print(f"(D, N) = ({D}, {N:2d})  ||avg||_2 = {np.linalg.norm(avg):.2e}")
