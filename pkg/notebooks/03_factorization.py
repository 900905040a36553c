# %% [markdown]
# # Factoring the summation matrix through a martingale witness
#
# An equal-norm martingale with a large type ratio lets us write the
# lower-triangular matrix of ones as B [L2, T] A with controlled norms.

# %%
import numpy as np

from mtype_lab import basis_witness, build_factorization, verify_factorization
from mtype_lab.operators import identity_operator
from mtype_lab.stepfn import L1

# %%
for n in (1, 2, 3):
    T = identity_operator(2 * n, L1)
    res = build_factorization(T, basis_witness(2 * n, n))
    M = np.array([[float(x) for x in row] for row in res.matrix])
    print(f"n={n} indices={res.indices} delta={res.delta}")
    print(M)
    print(f"  ||A|| ||B|| = {res.product_bound:.4f} <= {res.witness_bound:.4f}")
    assert verify_factorization(res, T).ok
