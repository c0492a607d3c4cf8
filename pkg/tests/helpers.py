"""Shared fixtures-by-hand and independent oracles used across test modules.

The oracles deliberately re-derive results by the most literal method
available (exhaustive scans, per-group sums) and stay independent of the
library code paths they check.
"""

import json

import numpy as np

from rfscreen import Dataset


def mask_timing(doc):
    """Deep-copied document with every timing field zeroed."""
    doc = json.loads(json.dumps(doc))
    if "timing" in doc:
        doc["timing"] = {key: 0.0 for key in doc["timing"]}
    return doc


def make_dataset(X, y, names=None):
    X = np.asarray(X, dtype=np.float64)
    if names is None:
        names = tuple(f"f{i + 1}" for i in range(X.shape[1]))
    return Dataset(features=X, labels=np.asarray(y, dtype=np.int64), feature_names=names)


def oracle_best_split(X, y, candidates, min_samples_leaf=1, min_purity_increase=0.0):
    """Exhaustive scan of every (feature, midpoint) pair, recomputing the
    weighted Gini decrease from scratch for each one."""
    X = np.asarray(X, dtype=np.float64)
    y0 = np.asarray(y, dtype=np.int64) - 1
    n = y0.shape[0]
    k = int(y0.max()) + 1
    counts = np.bincount(y0, minlength=k)
    if np.count_nonzero(counts) < 2:
        return None  # pure node
    p = counts / n
    g_parent = 1.0 - np.sum(p * p)
    best = None
    for f in sorted({int(c) for c in candidates}):
        vals = np.unique(X[:, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            thr = (lo + hi) / 2.0
            mask = X[:, f] <= thr
            nl = int(mask.sum())
            nr = n - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            pl = np.bincount(y0[mask], minlength=k) / nl
            gl = 1.0 - np.sum(pl * pl)
            pr = np.bincount(y0[~mask], minlength=k) / nr
            gr = 1.0 - np.sum(pr * pr)
            dec = g_parent - (nl / n) * gl - (nr / n) * gr
            if dec < min_purity_increase:
                continue
            if best is None or dec > best[2]:
                best = (f, thr, dec)
    return best


def random_split_instance(rng):
    """Small random classification table with deliberate value ties."""
    n = int(rng.integers(4, 21))
    f = int(rng.integers(1, 6))
    k = int(rng.integers(2, 5))
    if rng.random() < 0.5:
        X = rng.integers(0, 4, size=(n, f)).astype(np.float64)
    else:
        X = np.round(rng.normal(size=(n, f)), 2)
    if f >= 2 and rng.random() < 0.3:
        X[:, 1] = X[:, 0]  # duplicated column forces cross-feature ties
    y = rng.integers(1, k + 1, size=n).astype(np.int64)
    y[0], y[1] = 1, 2  # keep at least two classes
    msl = int(rng.integers(1, 4))
    mpi = float(rng.choice([0.0, 0.0, 0.01, 0.05]))
    return X, y, msl, mpi


def oracle_knn(train_X, train_y, query, k):
    """Distance-sort reference: explicit per-row squared distances."""
    d2 = [float(np.sum((query - train_X[i]) ** 2)) for i in range(train_X.shape[0])]
    order = sorted(range(len(d2)), key=lambda i: (d2[i], i))[:k]
    votes = {}
    for i in order:
        votes[int(train_y[i])] = votes.get(int(train_y[i]), 0) + 1
    return max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]


def oracle_f_scores(X, y):
    """Per-feature one-way ANOVA from the raw sum-of-squares decomposition."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    classes = sorted({int(c) for c in y})
    k = len(classes)
    out = []
    for j in range(X.shape[1]):
        col = X[:, j]
        gm = col.mean()
        ssb = 0.0
        ssw = 0.0
        for c in classes:
            grp = col[y == c]
            ssb += grp.shape[0] * (grp.mean() - gm) ** 2
            ssw += float(((grp - grp.mean()) ** 2).sum())
        msb = ssb / (k - 1)
        msw = ssw / (n - k)
        if col.max() == col.min():
            out.append(0.0)
        elif msw == 0.0:
            out.append(np.inf)
        else:
            out.append(msb / msw)
    return np.array(out)


def count_internal_nodes(model):
    """Recursive traversal, independent of selection_frequency's walk."""
    def visit(node):
        if node.is_leaf:
            return 0
        return 1 + visit(node.left) + visit(node.right)
    return sum(visit(root) for root in model.trees)
