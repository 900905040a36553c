# %% [markdown]
# # Haar type p of diagonal operators
#
# For a diagonal operator D_tau on l_p the Haar type p norm over the
# first n levels has a closed form. We compare it with the exact ratio
# of the explicit witness.

# %%
from fractions import Fraction as F

from mtype_lab import haar_ratio, type_p_ratio
from mtype_lab.ideal_norms import diagonal_type_exact, diagonal_type_witness
from mtype_lab.operators import diagonal_operator

t = [1, F(1, 2), F(1, 4), F(1, 8)]
D = diagonal_operator(t, len(t))

# %% [markdown]
# At p = 2 everything is exact.

# %%
for n in range(1, 5):
    r = haar_ratio(D, diagonal_type_witness(t, n, 2))
    print(n, r.sq, "==", sum(F(x) ** 2 for x in t[:n]))

# %% [markdown]
# For other p the ratio is a float; it matches the closed form.

# %%
for p in (F(4, 3), F(3, 2)):
    for n in range(1, 5):
        got = type_p_ratio(D, diagonal_type_witness(t, n, p), p)
        want = diagonal_type_exact(t, n, p).value
        print(f"p={p} n={n} witness={got:.12f} closed form={want:.12f}")
