"""Non-parametric classifiers: CART (Gini) decision tree and SMO-trained SVM."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.sparse as sp

from .errors import (DimensionMismatch, EmptyCounts, NonConvergenceWarning,
                     SingleClass)
from .vectorize import SparseMatrix, SparseVector


def _check_x(x: SparseVector, dim: int):
    if x.dim != dim:
        raise DimensionMismatch(f"input dim {x.dim} != model dim {dim}")


# ---------------------------------------------------------------------------
# CART
# ---------------------------------------------------------------------------

def gini_impurity(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    n = counts.sum()
    if n <= 0:
        raise EmptyCounts("class counts are all zero")
    p = counts / n
    return float(1.0 - np.dot(p, p))


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 40
    min_samples_split: int = 2
    min_impurity_decrease: float = 0.0


@dataclass(frozen=True)
class TreeLeaf:
    label: int
    class_counts: tuple[int, ...]


@dataclass(frozen=True)
class TreeSplit:
    feature: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[TreeLeaf, TreeSplit]


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    params: TreeParams
    dim: int
    n_classes: int

    def predict(self, x: SparseVector) -> int:
        return tree_predict(self, x)

    def depth(self) -> int:
        def walk(node):
            if isinstance(node, TreeLeaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(node):
            if isinstance(node, TreeLeaf):
                return 1
            return walk(node.left) + walk(node.right)
        return walk(self.root)


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    decrease: float
    left_counts: np.ndarray = field(compare=False)


def _leaf(counts: np.ndarray) -> TreeLeaf:
    return TreeLeaf(int(np.argmax(counts)), tuple(int(c) for c in counts))


def best_split(A: sp.csr_matrix, y: np.ndarray, n_classes: int) -> Split | None:
    """Best Gini split of the rows of `A` (one node's samples).

    Candidate thresholds are midpoints between consecutive distinct values
    of a column, where a column with fewer stored entries than rows also
    takes the value 0. Implicit zeros are handled as one weighted pseudo
    entry per column instead of being materialized. Ties on impurity
    decrease go to the lowest feature index, then the lowest threshold.
    """
    n = A.shape[0]
    parent = np.bincount(y, minlength=n_classes).astype(np.float64)
    coo = A.tocoo()
    cols = coo.col.astype(np.int64)
    vals = coo.data
    labels = y[coo.row]
    if cols.size == 0:
        return None
    onehot = np.zeros((cols.size, n_classes))
    onehot[np.arange(cols.size), labels] = 1.0

    present = np.unique(cols)
    nz_counts = np.zeros((present.size, n_classes))
    np.add.at(nz_counts, (np.searchsorted(present, cols), labels), 1.0)
    zero_counts = parent - nz_counts
    has_zero = zero_counts.sum(axis=1) > 0

    all_cols = np.concatenate([cols, present[has_zero]])
    all_vals = np.concatenate([vals, np.zeros(int(has_zero.sum()))])
    all_counts = np.vstack([onehot, zero_counts[has_zero]])

    order = np.lexsort((all_vals, all_cols))
    all_cols, all_vals, all_counts = all_cols[order], all_vals[order], all_counts[order]
    starts = np.flatnonzero(np.r_[True, (np.diff(all_cols) != 0) | (np.diff(all_vals) != 0)])
    g_cols = all_cols[starts]
    g_vals = all_vals[starts]
    g_counts = np.add.reduceat(all_counts, starts, axis=0)

    cum = np.cumsum(g_counts, axis=0)
    col_start = np.flatnonzero(np.r_[True, np.diff(g_cols) != 0])
    prev = np.where(col_start > 0, col_start - 1, 0)
    offsets = np.where((col_start > 0)[:, None], cum[prev], 0.0)
    group_col_id = np.cumsum(np.r_[True, np.diff(g_cols) != 0]) - 1
    base = offsets[group_col_id]
    left = cum - base

    cand = np.flatnonzero(g_cols[:-1] == g_cols[1:])
    if cand.size == 0:
        return None
    lc = left[cand]
    rc = parent - lc
    nl = lc.sum(axis=1)
    nr = rc.sum(axis=1)
    # n * (weighted child impurity) = n - score
    score = (lc ** 2).sum(axis=1) / nl + (rc ** 2).sum(axis=1) / nr
    top = score.max()
    k = int(np.flatnonzero(score >= top - 1e-12 * max(n, 1))[0])
    g = cand[k]
    lo, hi = g_vals[g], g_vals[g + 1]
    threshold = (lo + hi) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    decrease = gini_impurity(parent) - (n - score[k]) / n
    return Split(int(g_cols[g]), float(threshold), float(decrease), lc[k])


def _column(A: sp.csr_matrix, j: int) -> np.ndarray:
    return A[:, j].toarray().ravel()


def tree_fit(X: SparseMatrix, params: TreeParams | None = None,
             n_classes: int | None = None) -> TreeModel:
    """Greedy CART induction with Gini impurity."""
    params = params or TreeParams()
    y = X.labels
    if len(y) == 0:
        raise ValueError("tree_fit needs at least one sample")
    if n_classes is None:
        n_classes = X.n_classes if X.n_classes is not None else int(y.max()) + 1
    A = X.to_csr()

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        ys = y[rows]
        counts = np.bincount(ys, minlength=n_classes)
        if (depth >= params.max_depth or rows.size < params.min_samples_split
                or np.count_nonzero(counts) <= 1):
            return _leaf(counts)
        sub = A[rows]
        split = best_split(sub, ys, n_classes)
        if split is None or split.decrease < params.min_impurity_decrease:
            return _leaf(counts)
        go_left = _column(sub, split.feature) <= split.threshold
        return TreeSplit(split.feature, split.threshold,
                         grow(rows[go_left], depth + 1),
                         grow(rows[~go_left], depth + 1))

    return TreeModel(grow(np.arange(len(y)), 0), params, X.dim, n_classes)


def tree_predict(model: TreeModel, x: SparseVector) -> int:
    _check_x(x, model.dim)
    node = model.root
    while isinstance(node, TreeSplit):
        node = node.left if x.get(node.feature) <= node.threshold else node.right
    return node.label


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Kernel:
    """``linear``: ``<x1, x2>``; ``rbf``: ``exp(-gamma * ||x1 - x2||^2)``.

    An rbf kernel with ``gamma=None`` is resolved to ``1 / dim`` at fit time.
    """

    name: str = "rbf"
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.name!r}")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")

    def resolve(self, dim: int) -> "Kernel":
        if self.name == "rbf" and self.gamma is None:
            return Kernel("rbf", 1.0 / dim)
        return self

    def __call__(self, x1: SparseVector, x2: SparseVector) -> float:
        if self.name == "linear":
            return linear_kernel(x1, x2)
        if self.gamma is None:
            raise ValueError("unresolved rbf gamma")
        return rbf_kernel(x1, x2, self.gamma)

    def matrix(self, A: sp.csr_matrix, B: sp.csr_matrix) -> np.ndarray:
        """Dense kernel matrix between the rows of `A` and `B`."""
        G = np.asarray((A @ B.T).todense())
        if self.name == "linear":
            return G
        a2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
        b2 = np.asarray(B.multiply(B).sum(axis=1)).ravel()
        d2 = np.maximum(a2[:, None] + b2[None, :] - 2.0 * G, 0.0)
        return np.exp(-self.gamma * d2)


def linear_kernel(x1: SparseVector, x2: SparseVector) -> float:
    return x1.dot(x2)


def rbf_kernel(x1: SparseVector, x2: SparseVector, gamma: float) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return float(np.exp(-gamma * x1.squared_distance(x2)))


# ---------------------------------------------------------------------------
# SMO
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SvmBinaryModel:
    """Binary soft-margin SVM in dual form.

    ``f(x) = sum_i dual_coef[i] * K(support_vectors[i], x) + bias`` where
    ``dual_coef[i] = alpha_i * y_i``.
    """

    dual_coef: np.ndarray
    support_vectors: SparseMatrix
    support_indices: np.ndarray
    bias: float
    kernel: Kernel
    C: float
    converged: bool = True
    n_sweeps: int = 0

    @property
    def dim(self) -> int:
        return self.support_vectors.dim

    def decision_function(self, x: SparseVector) -> float:
        _check_x(x, self.dim)
        k = np.array([self.kernel(sv, x) for sv in self.support_vectors.rows])
        return float(k @ self.dual_coef + self.bias) if k.size else float(self.bias)

    def decision_matrix(self, X: SparseMatrix) -> np.ndarray:
        if X.dim != self.dim:
            raise DimensionMismatch(f"input dim {X.dim} != model dim {self.dim}")
        if len(self.support_vectors) == 0:
            return np.full(len(X), self.bias)
        K = self.kernel.matrix(X.to_csr(), self.support_vectors.to_csr())
        return K @ self.dual_coef + self.bias

    def predict_sign(self, x: SparseVector) -> int:
        return 1 if self.decision_function(x) >= 0 else -1


@dataclass(frozen=True, eq=False)
class SmoResult:
    alpha: np.ndarray
    bias: float
    converged: bool
    n_sweeps: int


def dual_objective(alpha: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_violations(alpha, y, K, bias, C, tol) -> np.ndarray:
    """Boolean mask of points whose margin breaks the KKT conditions."""
    margin = y * (K @ (alpha * y) + bias)
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~at_zero & ~at_c
    return ((at_zero & (margin < 1 - tol)) | (at_c & (margin > 1 + tol))
            | (free & (np.abs(margin - 1) > tol)))


def _optimal_bias(alpha, y, f_nob, C) -> float | None:
    """Bias minimizing the worst KKT violation for fixed multipliers."""
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(np.mean(y[free] - f_nob[free]))
    target = y - f_nob
    lower_mask = ((y > 0) & (alpha <= 0)) | ((y < 0) & (alpha >= C))
    upper_mask = ((y > 0) & (alpha >= C)) | ((y < 0) & (alpha <= 0))
    lo = target[lower_mask].max() if lower_mask.any() else -np.inf
    hi = target[upper_mask].min() if upper_mask.any() else np.inf
    if np.isfinite(lo) and np.isfinite(hi):
        return float((lo + hi) / 2)
    if np.isfinite(lo):
        return float(lo)
    if np.isfinite(hi):
        return float(hi)
    return None


def smo(K: np.ndarray, y: np.ndarray, C: float = 1.0, tol: float = 1e-3,
        max_passes: int = 10, seed: int = 0, max_sweeps: int = 10_000) -> SmoResult:
    """Simplified SMO over a precomputed kernel matrix.

    For every KKT violator ``i`` the partner ``j`` is drawn at random from
    a seeded generator. When that pair cannot move, the partner with the
    largest dual gain is used instead. Training stops once `max_passes`
    consecutive sweeps change no multiplier and the refitted bias leaves
    no violator; `max_sweeps` bounds the total work.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    rng = np.random.default_rng(seed)
    alpha = np.zeros(n)
    b = 0.0
    E = -y.copy()  # f(x_i) - y_i with f = 0
    diag = np.diag(K).copy()
    snap = 1e-12 * C

    def take_step(i: int, j: int) -> bool:
        nonlocal b
        if i == j:
            return False
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        if yi != yj:
            L, H = max(0.0, aj - ai), min(C, C + aj - ai)
        else:
            L, H = max(0.0, ai + aj - C), min(C, ai + aj)
        if H - L <= snap:
            return False
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        slope = yj * (E[i] - E[j])
        if eta > 0:
            aj_new = min(max(aj + slope / eta, L), H)
        else:
            gain_l = (L - aj) * slope - 0.5 * eta * (L - aj) ** 2
            gain_h = (H - aj) * slope - 0.5 * eta * (H - aj) ** 2
            aj_new = L if gain_l > gain_h else H
        if aj_new - L <= snap:
            aj_new = L
        elif H - aj_new <= snap:
            aj_new = H
        # L and H carry rounding error; pin values next to the box edges
        if aj_new < snap:
            aj_new = 0.0
        elif aj_new > C - snap:
            aj_new = C
        t = aj_new - aj
        gain = t * slope - 0.5 * eta * t * t
        if abs(t) <= snap or gain <= 1e-15:
            return False
        ai_new = ai - yi * yj * t
        if ai_new < snap:
            ai_new = 0.0
        elif ai_new > C - snap:
            ai_new = C
        di, dj = ai_new - ai, aj_new - aj
        b1 = b - E[i] - yi * di * diag[i] - yj * dj * K[i, j]
        b2 = b - E[j] - yi * di * K[i, j] - yj * dj * diag[j]
        if 0 < ai_new < C:
            b_new = b1
        elif 0 < aj_new < C:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0
        E[:] += yi * di * K[i] + yj * dj * K[j] + (b_new - b)
        alpha[i], alpha[j] = ai_new, aj_new
        b = b_new
        return True

    def best_partner(i: int) -> int:
        s = y[i] * y
        ai, aj = alpha[i], alpha
        L = np.where(s < 0, np.maximum(0.0, aj - ai), np.maximum(0.0, ai + aj - C))
        H = np.where(s < 0, np.minimum(C, C + aj - ai), np.minimum(C, ai + aj))
        eta = diag[i] + diag - 2.0 * K[i]
        slope = y * (E[i] - E)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(eta > 0, slope / eta, np.where(slope > 0, np.inf, -np.inf))
        t = np.clip(aj + t, L, H) - aj
        gain = t * slope - 0.5 * eta * t * t
        gain[i] = -np.inf
        gain[H - L <= snap] = -np.inf
        return int(np.argmax(gain))

    def violates(i: int) -> bool:
        r = y[i] * E[i]
        return (r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)

    sweeps = 0
    passes = 0
    converged = False
    stalled = False
    while sweeps < max_sweeps:
        changed = 0
        for i in range(n):
            if not violates(i):
                continue
            j = int(rng.integers(n - 1))
            j += j >= i
            if take_step(i, j) or take_step(i, best_partner(i)):
                changed += 1
        sweeps += 1
        if changed:
            passes = 0
            stalled = False
        else:
            passes += 1
        if passes < max_passes:
            continue
        refit = _optimal_bias(alpha, y, E + y - b, C)
        if refit is not None:
            E += refit - b
            b = refit
        if not kkt_violations(alpha, y, K, b, C, tol).any():
            converged = True
            break
        if stalled:
            # no pair moved since the previous bias refit
            break
        stalled = True
        passes = 0
    return SmoResult(alpha, float(b), converged, sweeps)


def _binary_model(X: SparseMatrix, y: np.ndarray, res: SmoResult, kernel: Kernel,
                  C: float) -> SvmBinaryModel:
    sv = np.flatnonzero(res.alpha > 0)
    return SvmBinaryModel(res.alpha[sv] * y[sv], X.take(sv), sv, res.bias,
                          kernel, float(C), res.converged, res.n_sweeps)


def _warn_unconverged(res: SmoResult, tag: str = ""):
    if not res.converged:
        warnings.warn(f"SMO did not converge in {res.n_sweeps} sweeps{tag}",
                      NonConvergenceWarning, stacklevel=3)


def svm_fit_binary(X: SparseMatrix, y, kernel: Kernel | None = None, C: float = 1.0,
                   tol: float = 1e-3, max_passes: int = 10, seed: int = 0,
                   max_sweeps: int = 10_000, gram: np.ndarray | None = None) -> SvmBinaryModel:
    """Train a binary SVM with labels in {-1, +1}.

    A model that exhausts `max_sweeps` is still returned, flagged with
    ``converged=False``, and a `NonConvergenceWarning` is issued.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (len(X),):
        raise ValueError("y must align with the rows of X")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClass("both +1 and -1 labels are required")
    if C <= 0 or tol <= 0 or max_passes < 1:
        raise ValueError("C, tol and max_passes must be positive")
    kernel = (kernel or Kernel()).resolve(X.dim)
    if gram is None:
        A = X.to_csr()
        gram = kernel.matrix(A, A)
    res = smo(gram, y, C, tol, max_passes, seed, max_sweeps)
    _warn_unconverged(res)
    return _binary_model(X, y, res, kernel, C)


@dataclass(frozen=True, eq=False)
class SvmMulticlassModel:
    binaries: tuple[SvmBinaryModel, ...]
    n_classes: int

    @property
    def dim(self) -> int:
        return self.binaries[0].dim

    @property
    def converged(self) -> bool:
        return all(b.converged for b in self.binaries)

    def decision_values(self, x: SparseVector) -> np.ndarray:
        return np.array([b.decision_function(x) for b in self.binaries])

    def decision_matrix(self, X: SparseMatrix) -> np.ndarray:
        return np.column_stack([b.decision_matrix(X) for b in self.binaries])

    def predict(self, x: SparseVector) -> int:
        return svm_predict(self, x)


def svm_fit_ovr(X: SparseMatrix, kernel: Kernel | None = None, C: float = 1.0,
                tol: float = 1e-3, max_passes: int = 10, seed: int = 0,
                max_sweeps: int = 10_000, n_classes: int | None = None) -> SvmMulticlassModel:
    """One-vs-rest SVM: binary ``c`` separates class ``c`` (+1) from the rest.

    Every binary draws from its own generator seeded by ``(seed, c)`` and
    all of them share one kernel matrix.
    """
    labels = X.labels
    if n_classes is None:
        n_classes = X.n_classes if X.n_classes is not None else int(labels.max()) + 1
    if n_classes < 2:
        raise SingleClass("one-vs-rest needs at least 2 classes")
    kernel = (kernel or Kernel()).resolve(X.dim)
    A = X.to_csr()
    gram = kernel.matrix(A, A)
    binaries = []
    for c in range(n_classes):
        y = np.where(labels == c, 1.0, -1.0)
        if not ((y > 0).any() and (y < 0).any()):
            raise SingleClass(f"class {c}: one-vs-rest problem has a single label")
        res = smo(gram, y, C, tol, max_passes, hash_seed(seed, c), max_sweeps)
        _warn_unconverged(res, f" (class {c})")
        binaries.append(_binary_model(X, y, res, kernel, C))
    return SvmMulticlassModel(tuple(binaries), n_classes)


def hash_seed(seed: int, stream: int) -> int:
    """Independent per-binary seed derived from (seed, stream)."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


def svm_predict(model: SvmMulticlassModel, x: SparseVector) -> int:
    return int(np.argmax(model.decision_values(x)))
