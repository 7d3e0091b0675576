"""Kernel SVM trained by SMO, then one-vs-rest for several classes."""

import numpy as np

from sparsetext import SparseMatrix
from sparsetext.nonparametric import (Kernel, dual_objective, smo, svm_fit_binary, svm_fit_ovr,
                                      svm_predict)

# the smallest possible problem: two points on a line
X = SparseMatrix.from_dense([[-1.0], [1.0]])
model = svm_fit_binary(X, [-1, 1], Kernel("linear"), C=10)
print("two points: dual coefficients", model.dual_coef, "bias", round(model.bias, 12))

# a noisy 2-D problem: most multipliers are zero, a few sit on the margin or at C
rng = np.random.default_rng(0)
pts = np.vstack([rng.normal(size=(20, 2)) + 1.2, rng.normal(size=(20, 2)) - 1.2])
y = np.repeat([1.0, -1.0], 20)
K = Kernel("rbf", 0.5).matrix(SparseMatrix.from_dense(pts).to_csr(),
                              SparseMatrix.from_dense(pts).to_csr())
res = smo(K, y, C=1.0, tol=1e-3, seed=1)
print(f"\nSMO: converged={res.converged} after {res.n_sweeps} sweeps, "
      f"dual objective {dual_objective(res.alpha, y, K):.4f}")
print("support vectors:", int((res.alpha > 0).sum()), "of", len(y),
      "| at the bound C:", int((res.alpha == 1.0).sum()))

# one-vs-rest over four blobs
centers = np.array([[2, 0], [0, 2], [-2, 0], [0, -2]], float)
pts = np.vstack([c + 0.5 * rng.normal(size=(15, 2)) for c in centers])
labels = np.repeat(np.arange(4), 15)
ovr = svm_fit_ovr(SparseMatrix.from_dense(pts, labels), Kernel("rbf", 0.5), C=1.0, seed=7)
probe = SparseMatrix.from_dense([[1.5, 0.2], [0.1, -1.7]])
print("\none-vs-rest decision values:\n", np.round(ovr.decision_matrix(probe), 3))
print("predicted classes:", [svm_predict(ovr, row) for row in probe.rows])
