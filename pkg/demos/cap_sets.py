"""
Progression-free sets in small vector spaces
============================================

Largest sets without non-trivial 3-term progressions, found exactly, and
the Fourier count that confirms they only contain trivial ones.
"""
from fractions import Fraction

from hpx import GroupSpec, HPSpec, r_k_exact, s3_fourier_exact, hp_size

for p, n in [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2)]:
    hp = HPSpec.default(GroupSpec(p, (n,)), 3)
    density, A = r_k_exact(hp)
    # a progression-free set only meets the constant progressions
    s3 = s3_fourier_exact(A)
    assert s3 == Fraction(A.cardinality, hp_size(hp))
    print(f"F_{p}^{n}: r_3 = {density} (|A| = {A.cardinality}), S^3(1_A) = {s3}")

# The maximal cap of F_3^2 is the square {0,1}^2
_, cap = r_k_exact(HPSpec.default(GroupSpec(3, (2,)), 3))
print("cap:", [str(e) for e in cap.elements()])
