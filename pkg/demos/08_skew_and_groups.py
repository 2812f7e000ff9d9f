"""
Beyond finite partitions: skew products and group rotations
===========================================================

Two families live naturally on exact rational points rather than on cell
matrices.  On the 3-torus, conjugating the translation by t with the
affine skew map produces another translation, computed here pointwise
with zero error; the resulting self-map of translations is the skew step
(a, b, c) -> (a, a+b, a+b+c), which preserves each torus {first
coordinate fixed}.  On a finite abelian group, conjugating the rotation
by z with an automorphism M gives the rotation by M z, again verified
pointwise over the whole group.
"""

from fractions import Fraction

from lenslab import (
    NonInvertible,
    group_automorphism_check,
    group_elements,
    group_rotation_conjugation,
    skew_Tbar_conjugation,
    skew_W_step,
    skew_torus_restriction,
    torus_point,
)

# -- the skew conjugation identity ------------------------------------------
alpha = Fraction(1, 7)
t = torus_point(Fraction(1, 3), Fraction(2, 5), Fraction(0))
conj = skew_Tbar_conjugation(t, alpha)
print("translation by", tuple(str(x) for x in t))
print("conjugated:    ", tuple(str(x) for x in conj))
print("equals the skew step:", conj == skew_W_step(t))

# The answer never depends on alpha.
print("same for alpha = 9/11:",
      skew_Tbar_conjugation(t, Fraction(9, 11)) == conj)

# -- orbit of a translation under the skew step ------------------------------
print("\nskew orbit of", tuple(str(x) for x in t))
p = t
for n in range(1, 6):
    p = skew_W_step(p)
    print(f"  step {n}:", tuple(str(x) for x in p))
print("first coordinate is invariant:", p[0] == t[0])

# On the invariant torus {x = a} the step restricts to an affine map of
# the remaining two coordinates.
a = t[0]
q2 = (t[1], t[2])
for _ in range(3):
    q2 = skew_torus_restriction(a, q2)
full = skew_W_step(skew_W_step(skew_W_step(t)))
print("restriction tracks the full step:", q2 == (full[1], full[2]))

# -- rotations on a finite abelian group ------------------------------------
moduli = (4, 3)
mat = [[3, 0], [0, 2]]
group_automorphism_check(moduli, mat)
print("\ngroup Z4 x Z3 has", len(group_elements(moduli)), "elements")

z = (1, 1)
mz = group_rotation_conjugation(moduli, mat, z)
print(f"conjugating rotation by {z} with M = {mat} gives rotation by {mz}")

# A matrix that is not invertible on the group is rejected.
try:
    group_rotation_conjugation(moduli, [[2, 0], [0, 1]], z)
except NonInvertible as e:
    print("non-automorphism rejected:", e)
