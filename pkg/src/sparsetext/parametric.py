"""Parametric classifiers: Fisher LDA and multinomial Naive Bayes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .errors import DegenerateClass, DimensionMismatch, SingularScatter
from .vectorize import SparseMatrix, SparseVector

DEFAULT_RIDGE = 1e-3
DEFAULT_MAX_DENSE_DIM = 5000


def _labels_and_classes(X: SparseMatrix, n_classes: int | None):
    y = X.labels
    if n_classes is None:
        n_classes = X.n_classes if X.n_classes is not None else int(y.max()) + 1
    return y, n_classes


def _check_x(x: SparseVector, dim: int):
    if x.dim != dim:
        raise DimensionMismatch(f"input dim {x.dim} != model dim {dim}")


# ---------------------------------------------------------------------------
# Linear discriminant analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LdaModel:
    """Fitted Fisher discriminant.

    Attributes
    ----------
    class_means : ndarray of shape (n_classes, dim)
    projection : ndarray of shape (dim, n_components)
        Unit-norm discriminant directions, largest eigenvalue first.
    projected_centroids : ndarray of shape (n_classes, n_components)
    eigenvalues : ndarray of shape (n_components,)
    ridge : float
    """

    class_means: np.ndarray
    projection: np.ndarray
    projected_centroids: np.ndarray
    eigenvalues: np.ndarray
    ridge: float

    @property
    def dim(self) -> int:
        return self.class_means.shape[1]

    @property
    def n_classes(self) -> int:
        return self.class_means.shape[0]

    def transform(self, x: SparseVector) -> np.ndarray:
        _check_x(x, self.dim)
        return x.values @ self.projection[x.indices]

    def predict(self, x: SparseVector) -> int:
        return lda_predict(self, x)


def scatter_matrices(X: SparseMatrix, n_classes: int | None = None):
    """Class means, grand mean, within-class and between-class scatter.

    ``S_w = sum_c sum_{x in c} (x - m_c)(x - m_c)^T`` and
    ``S_b = sum_c n_c (m_c - m)(m_c - m)^T``, both dense ``dim x dim``.
    """
    y, n_classes = _labels_and_classes(X, n_classes)
    A = X.to_csr()
    dim = X.dim
    counts = np.bincount(y, minlength=n_classes)
    means = np.zeros((n_classes, dim))
    S_w = np.zeros((dim, dim))
    for c in range(n_classes):
        Ac = A[y == c]
        if counts[c] == 0:
            continue
        means[c] = np.asarray(Ac.sum(axis=0)).ravel() / counts[c]
        # centering densely is cheaper than the sparse Gram at these sizes
        D = Ac.toarray() - means[c]
        S_w += D.T @ D
    grand = (counts @ means) / counts.sum()
    dm = means - grand
    S_b = (dm.T * counts) @ dm
    S_w = (S_w + S_w.T) / 2
    return means, grand, S_w, S_b, counts


def solve_discriminants(S_w: np.ndarray, S_b: np.ndarray, ridge: float,
                        n_components: int):
    """Leading eigenpairs of ``(S_w + ridge I)^{-1} S_b``.

    The generalized problem is symmetrized with the Cholesky factor
    ``L L^T = S_w + ridge I``: the eigenvectors ``v`` of
    ``L^{-1} S_b L^{-T}`` map back to ``w = L^{-T} v``.

    Returns
    -------
    eigenvalues : ndarray, descending
    W : ndarray of shape (dim, n_components), unit columns, sign fixed so
        the largest-magnitude entry of each column is positive.
    """
    dim = S_w.shape[0]
    A = S_w + ridge * np.eye(dim)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise SingularScatter(
            "within-class scatter is not positive definite; retry with ridge > 0"
        ) from None
    if ridge == 0 and np.min(np.diag(L)) <= np.sqrt(np.finfo(float).eps) * np.max(np.diag(L)):
        raise SingularScatter("within-class scatter is numerically singular")
    Linv_Sb = scipy.linalg.solve_triangular(L, S_b, lower=True)
    M = scipy.linalg.solve_triangular(L, Linv_Sb.T, lower=True)
    M = (M + M.T) / 2
    lo = dim - n_components
    evals, V = scipy.linalg.eigh(M, subset_by_index=[lo, dim - 1])
    evals, V = evals[::-1], V[:, ::-1]
    W = scipy.linalg.solve_triangular(L.T, V, lower=False)
    W /= np.linalg.norm(W, axis=0)
    pivot = np.argmax(np.abs(W), axis=0)
    W *= np.sign(W[pivot, np.arange(W.shape[1])])
    return evals, W


def lda_fit(X: SparseMatrix, ridge: float = DEFAULT_RIDGE,
            n_classes: int | None = None,
            max_dense_dim: int = DEFAULT_MAX_DENSE_DIM) -> LdaModel:
    """Fit a multi-class Fisher discriminant with nearest-centroid decisions.

    Parameters
    ----------
    X : SparseMatrix
        Labeled training rows.
    ridge : float
        Added to the diagonal of the within-class scatter.
    n_classes : int, optional
        Defaults to the class count recorded on `X`.
    max_dense_dim : int
        Refuse to form the ``dim x dim`` scatter matrices above this size.
    """
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if X.dim > max_dense_dim:
        raise MemoryError(
            f"dim {X.dim} exceeds dense scatter ceiling {max_dense_dim}"
        )
    y, n_classes = _labels_and_classes(X, n_classes)
    counts = np.bincount(y, minlength=n_classes)
    if n_classes < 2:
        raise DegenerateClass("LDA needs at least 2 classes")
    small = np.flatnonzero(counts < 2)
    if small.size:
        raise DegenerateClass(f"classes {small.tolist()} have fewer than 2 samples")
    means, _, S_w, S_b, _ = scatter_matrices(X, n_classes)
    n_components = min(n_classes - 1, X.dim)
    evals, W = solve_discriminants(S_w, S_b, ridge, n_components)
    return LdaModel(means, W, means @ W, evals, float(ridge))


def lda_predict(model: LdaModel, x: SparseVector) -> int:
    z = model.transform(x)
    d = np.sum((model.projected_centroids - z) ** 2, axis=1)
    return int(np.argmin(d))


# ---------------------------------------------------------------------------
# Naive Bayes
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NbModel:
    log_priors: np.ndarray
    log_likelihoods: np.ndarray
    smoothing: float

    @property
    def dim(self) -> int:
        return self.log_likelihoods.shape[1]

    @property
    def n_classes(self) -> int:
        return self.log_priors.shape[0]

    def joint_log_likelihood(self, x: SparseVector) -> np.ndarray:
        _check_x(x, self.dim)
        return self.log_priors + self.log_likelihoods[:, x.indices] @ x.values

    def predict(self, x: SparseVector) -> int:
        return nb_predict(self, x)


def nb_fit(X: SparseMatrix, alpha: float = 1.0,
           n_classes: int | None = None) -> NbModel:
    """Multinomial Naive Bayes over non-negative feature weights.

    ``theta[c, j] = (alpha + sum_{x in c} x_j) / (alpha * dim + sum_{x in c} sum_j x_j)``
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    y, n_classes = _labels_and_classes(X, n_classes)
    if n_classes < 2:
        raise DegenerateClass("Naive Bayes needs at least 2 classes")
    counts = np.bincount(y, minlength=n_classes)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise DegenerateClass(f"classes {empty.tolist()} have no samples")
    A = X.to_csr()
    feature_sums = np.zeros((n_classes, X.dim))
    for c in range(n_classes):
        feature_sums[c] = np.asarray(A[y == c].sum(axis=0)).ravel()
    numer = alpha + feature_sums
    denom = alpha * X.dim + feature_sums.sum(axis=1, keepdims=True)
    log_theta = np.log(numer) - np.log(denom)
    log_priors = np.log(counts) - np.log(counts.sum())
    return NbModel(log_priors, log_theta, float(alpha))


def nb_predict(model: NbModel, x: SparseVector) -> int:
    return int(np.argmax(model.joint_log_likelihood(x)))


def nb_posterior(model: NbModel, x: SparseVector) -> np.ndarray:
    """Normalized class posteriors, computed stably in log space."""
    jll = model.joint_log_likelihood(x)
    return np.exp(jll - scipy.special.logsumexp(jll))

