# %% [markdown]
# # Haar cotype of the summation operator
#
# The summation operator on l1^{2^n} -> linf^{2^n} has Haar cotype norm
# growing like sqrt(n). This walk-through builds the explicit witness,
# checks its ratio exactly and compares it with the certified bounds.

# %%
from mtype_lab import QuadRational, estimate, haar_ratio
from mtype_lab.ideal_norms import summation_cotype_witness
from mtype_lab.operators import apply, summation_operator
from mtype_lab.haar import tree
from mtype_lab.stepfn import LINF

# %% [markdown]
# Every coefficient of the witness at level k is sent to a vector of
# sup-norm 2^{-(k+1)/2}, so each level contributes 1/4 to the square sum.

# %%
n = 4
S = summation_operator(2 ** n)
coeffs = summation_cotype_witness(n)
for k, j in tree(1, n):
    assert LINF.norm(apply(S, coeffs[(k, j)])) == QuadRational.sqrt2_power(-(k + 1))
r = haar_ratio(S, coeffs, "cotype")
print("witness ratio^2 =", r.sq, " (expected", 1 + n / 4, ")")

# %% [markdown]
# The estimator folds this witness into its search, so the certified lower
# bound is at least as large, and the upper bound comes with provenance.

# %%
print(f"{'n':>2} {'lower':>8} {'upper':>8}  upper from")
for n in range(1, 6):
    e = estimate(summation_operator(2 ** n), "haar_cotype", (0, n))
    print(f"{n:>2} {e.lower:8.4f} {e.upper:8.4f}  {e.upper_source}")
