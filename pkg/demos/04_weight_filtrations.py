# Weight filtrations of nilpotent operators and E1 bookkeeping for surfaces.
from adelikit.monodromy_weight import (
    NilpotentOperator,
    StrataData,
    closed_form_filtration,
    jordan_nilpotent,
    jump_threshold,
    steenbrink_e1,
    weight_filtration,
)

for blocks in ([2], [3], [3, 1], [2, 2, 1]):
    N = NilpotentOperator(jordan_nilpotent(blocks))
    W = weight_filtration(N)
    same = all(W[r] == closed_form_filtration(N)[r] for r in range(5))
    print(f"blocks {blocks}: dims W_0..W_4 = {[W[r].dim for r in range(5)]}, graded {W.graded_dims}, closed form agrees: {same}")

# four planes meeting like the faces of a tetrahedron
tetra = StrataData(((1, 0, 1),) * 4, ((1, 0),) * 6, 4)
e1 = steenbrink_e1(tetra)
print("tetrahedron E1:", e1.as_tuple())
for pos, tag in e1.tags.items():
    print(f"  E1^{pos} = {tag}")

# a chain of surfaces glued along elliptic curves
chain = StrataData(((1, 0, 10),) * 3, ((1, 2), (1, 2)))
print("elliptic chain E1:", steenbrink_e1(chain).as_tuple())

print("jumps: k=3 ->", jump_threshold(3), "; k=2, dim im N = 2 ->", jump_threshold(2, 2), "; K3, k=2 ->", jump_threshold(2, family="K3"))
