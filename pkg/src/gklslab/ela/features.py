"""Sample-based landscape features: ela_distr, ela_meta, disp, nbc, pca, ic.

Every function first puts the sample into canonical row order
(lexicographic in the coordinates, then by value), so results do not depend
on how the rows were shuffled.  Tie-breaking inside the features (best-q%
selection, nearest-better choice, tour steps) follows that order.
"""
from __future__ import annotations

import hashlib
import math

import numpy as np
from scipy.spatial.distance import cdist, pdist


class DegenerateSample(ValueError):
    """The sample cannot support the feature set (e.g. constant values)."""


class SingularFit(ValueError):
    """A least-squares meta model is rank deficient."""


DISP_QUANTILES = (2, 5, 10, 25)  # percent
KDE_GRID = 512
PEAK_MASS = 0.1
PCA_LEVEL = 0.9
IC_GRID = 1000
IC_SETTLE = 0.05
IC_RATIO = 0.5

META_MODELS = ("lin_simple", "lin_w_interact", "quad_simple", "quad_w_interact")

FEATURE_NAMES = {
    "ela_distr": ["ela_distr.skewness", "ela_distr.kurtosis", "ela_distr.number_of_peaks"],
    "ela_meta": [
        "ela_meta.lin_simple.intercept",
        "ela_meta.lin_simple.adj_r2",
        "ela_meta.lin_w_interact.adj_r2",
        "ela_meta.quad_simple.adj_r2",
        "ela_meta.quad_simple.cond",
        "ela_meta.quad_w_interact.adj_r2",
    ],
    "disp": [f"disp.ratio_{stat}_{q:02d}" for stat in ("mean", "median") for q in DISP_QUANTILES],
    "nbc": [
        "nbc.nn_nb.sd_ratio",
        "nbc.nn_nb.mean_ratio",
        "nbc.nn_nb.cor",
        "nbc.dist_ratio.coeff_var",
        "nbc.nb_fitness.cor",
    ],
    "pca": [
        f"pca.{what}.{kind}_{tag}"
        for what in ("expl_var", "expl_var_PC1")
        for kind in ("cov", "cor")
        for tag in ("x", "init")
    ],
    "ic": ["ic.h.max", "ic.eps.s", "ic.eps.max", "ic.eps.ratio", "ic.m0"],
}
ALL_FEATURES = [name for names in FEATURE_NAMES.values() for name in names]


def canonical(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.lexsort((y,) + tuple(X.T[::-1]))
    return X[order], y[order]


def _pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da, db = a - a.mean(), b - b.mean()
    den = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    return float(np.sum(da * db)) / den if den > 0 else float("nan")


# ela_distr ------------------------------------------------------------------


def silverman_bandwidth(y) -> float:
    """Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5)."""
    n = len(y)
    sd = float(np.std(y, ddof=1))
    q75, q25 = np.percentile(y, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if spread <= 0:
        spread = sd
    return 0.9 * spread * n**-0.2


def kde_peaks(y, grid_size: int = KDE_GRID, mass: float = PEAK_MASS) -> int:
    """Modes of a Gaussian KDE holding more than ``mass`` of the density.

    The density is split at its interior local minima; each segment is one
    candidate peak.
    """
    y = np.asarray(y, dtype=float)
    sd = float(np.std(y, ddof=1))
    bw = silverman_bandwidth(y)
    grid = np.linspace(y.min() - 3 * sd, y.max() + 3 * sd, grid_size)
    z = (grid[:, None] - y[None, :]) / bw
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (len(y) * bw * math.sqrt(2 * math.pi))
    slope = np.sign(np.diff(dens))
    minima = np.flatnonzero(np.diff(slope) == 2) + 1
    total = dens.sum()
    return int(sum(seg.sum() / total > mass for seg in np.split(dens, minima)))


def features_distr(X, y) -> dict:
    _, y = canonical(np.reshape(X, (len(y), -1)), y)
    if len(y) < 4:
        raise DegenerateSample("ela_distr needs at least 4 values")
    if np.ptp(y) == 0:
        raise DegenerateSample("constant values")
    dev = y - y.mean()
    m2 = np.mean(dev**2)
    m3 = np.mean(dev**3)
    m4 = np.mean(dev**4)
    return {
        "ela_distr.skewness": float(m3 / m2**1.5),
        "ela_distr.kurtosis": float(m4 / m2**2 - 3.0),
        "ela_distr.number_of_peaks": float(kde_peaks(y)),
    }


# ela_meta -------------------------------------------------------------------


def _meta_design(X, model: str) -> np.ndarray:
    n, dim = X.shape
    cols = [np.ones((n, 1)), X]
    if model in ("quad_simple", "quad_w_interact"):
        cols.append(X**2)
    if model in ("lin_w_interact", "quad_w_interact"):
        iu, ju = np.triu_indices(dim, k=1)
        cols.append(X[:, iu] * X[:, ju])
    return np.hstack(cols)


def _fit(A, y):
    n, p1 = A.shape
    if n <= p1:
        raise SingularFit(f"{n} points for {p1} coefficients")
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < p1:
        raise SingularFit(f"design rank {rank} < {p1}")
    resid = y - A @ coef
    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst
    p = p1 - 1
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - p - 1)
    return coef, adj


def features_meta(X, y) -> dict:
    X, y = canonical(X, y)
    if np.ptp(y) == 0:
        raise DegenerateSample("constant values")
    dim = X.shape[1]
    out = {}
    for model in META_MODELS:
        coef, adj = _fit(_meta_design(X, model), y)
        out[f"ela_meta.{model}.adj_r2"] = adj
        if model == "lin_simple":
            out["ela_meta.lin_simple.intercept"] = float(coef[0])
        elif model == "quad_simple":
            quad = np.abs(coef[1 + dim:])
            out["ela_meta.quad_simple.cond"] = float(quad.max() / quad.min()) if quad.min() > 0 else float("nan")
    return {k: out[k] for k in FEATURE_NAMES["ela_meta"]}


# disp -----------------------------------------------------------------------


def row_digests(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=float)
    return np.array(
        [int.from_bytes(hashlib.blake2b(row.tobytes(), digest_size=8).digest(), "little") for row in X],
        dtype=np.uint64,
    )



def features_disp(X, y) -> dict:
    X, y = canonical(X, y)
    n = len(y)
    if n < 50:
        raise DegenerateSample("disp needs at least 50 points")
    # value ties are broken by a hash of the coordinates: deterministic,
    # independent of row order, and unrelated to location
    order = np.lexsort((row_digests(X), y))
    all_d = pdist(X)
    mean_all, median_all = all_d.mean(), np.median(all_d)
    out = {}
    for q in DISP_QUANTILES:
        k = max(2, -(-q * n // 100))
        d = pdist(X[order[:k]])
        out[f"disp.ratio_mean_{q:02d}"] = float(d.mean() / mean_all)
        out[f"disp.ratio_median_{q:02d}"] = float(np.median(d) / median_all)
    return {k: out[k] for k in FEATURE_NAMES["disp"]}


# nbc ------------------------------------------------------------------------


def nearest_better(X, y):
    """Nearest-neighbour distance, nearest-better distance and nearest-better
    index (-1 where no strictly better point exists) for rows in the given
    order.  Points without a better neighbour get their largest distance."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    dist = cdist(X, X)
    far = dist.max(axis=1)
    np.fill_diagonal(dist, np.inf)
    nn = dist.min(axis=1)
    better = np.where(y[None, :] < y[:, None], dist, np.inf)
    idx = np.argmin(better, axis=1)
    nb = better[np.arange(len(y)), idx]
    none = ~np.isfinite(nb)
    idx[none] = -1
    nb[none] = far[none]
    return nn, nb, idx


def features_nbc(X, y) -> dict:
    X, y = canonical(X, y)
    if len(y) < 10:
        raise DegenerateSample("nbc needs at least 10 points")
    if np.ptp(y) == 0:
        raise DegenerateSample("constant values")
    nn, nb, idx = nearest_better(X, y)
    indegree = np.bincount(idx[idx >= 0], minlength=len(y))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = nn / nb
        return {
            "nbc.nn_nb.sd_ratio": float(np.std(nn, ddof=1) / np.std(nb, ddof=1)),
            "nbc.nn_nb.mean_ratio": float(nn.mean() / nb.mean()),
            "nbc.nn_nb.cor": _pearson(nn, nb),
            "nbc.dist_ratio.coeff_var": float(np.std(ratio, ddof=1) / ratio.mean()),
            "nbc.nb_fitness.cor": _pearson(indegree, y),
        }


# pca ------------------------------------------------------------------------


def variance_shares(M, correlation: bool) -> np.ndarray:
    """Eigenvalue shares (descending) of the covariance or correlation matrix."""
    M = np.asarray(M, dtype=float)
    if correlation:
        sd = M.std(axis=0, ddof=1)
        if np.any(sd == 0):
            return np.full(M.shape[1], np.nan)
        C = np.corrcoef(M, rowvar=False)
    else:
        C = np.cov(M, rowvar=False)
    ev = np.clip(np.linalg.eigvalsh(C)[::-1], 0.0, None)
    return ev / ev.sum()


def features_pca(X, y) -> dict:
    X, y = canonical(X, y)
    if len(y) <= X.shape[1] + 1:
        raise DegenerateSample("pca needs more points than columns")
    out = {}
    for tag, M in (("x", X), ("init", np.column_stack([X, y]))):
        for kind in ("cov", "cor"):
            shares = variance_shares(M, kind == "cor")
            if np.isnan(shares).any():
                out[f"pca.expl_var.{kind}_{tag}"] = float("nan")
                out[f"pca.expl_var_PC1.{kind}_{tag}"] = float("nan")
                continue
            k = int(np.argmax(np.cumsum(shares) >= PCA_LEVEL)) + 1
            out[f"pca.expl_var.{kind}_{tag}"] = k / M.shape[1]
            out[f"pca.expl_var_PC1.{kind}_{tag}"] = float(shares[0])
    return {k: out[k] for k in FEATURE_NAMES["pca"]}


# ic -------------------------------------------------------------------------


def nn_tour(X) -> np.ndarray:
    """Greedy nearest-neighbour tour starting at row 0."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    visited = np.zeros(n, dtype=bool)
    path = np.empty(n, dtype=int)
    cur = 0
    for step in range(n):
        path[step] = cur
        visited[cur] = True
        if step == n - 1:
            break
        d = np.sqrt(np.sum((X - X[cur]) ** 2, axis=1))
        d[visited] = np.inf
        cur = int(np.argmin(d))
    return path


def ic_grid(value_range: float) -> np.ndarray:
    lo = math.log10(1e-5 * value_range)
    hi = math.log10(value_range)
    return np.concatenate([[0.0], np.logspace(lo, hi, IC_GRID)])


_PAIR_CODES = [3 * (a + 1) + (b + 1) for a in (-1, 0, 1) for b in (-1, 0, 1) if a != b]


def ic_curves(diffs, grid):
    """Entropy H(eps) and partial information M(eps) for every grid value."""
    diffs = np.asarray(diffs, dtype=float)
    S = np.where(diffs[None, :] > grid[:, None], 1, 0) - np.where(diffs[None, :] < -grid[:, None], 1, 0)
    codes = 3 * (S[:, :-1] + 1) + (S[:, 1:] + 1)
    m = codes.shape[1]
    H = np.zeros(len(grid))
    for c in _PAIR_CODES:
        p = np.count_nonzero(codes == c, axis=1) / m
        with np.errstate(divide="ignore", invalid="ignore"):
            H -= np.where(p > 0, p * (np.log(p) / math.log(6)), 0.0)
    M = np.empty(len(grid))
    for i, row in enumerate(S):
        nz = row[row != 0]
        M[i] = 0.0 if nz.size == 0 else (1 + np.count_nonzero(nz[1:] != nz[:-1])) / S.shape[1]
    return H, M


def features_ic(X, y) -> dict:
    X, y = canonical(X, y)
    if len(y) < 10:
        raise DegenerateSample("ic needs at least 10 points")
    value_range = float(y.max() - y.min())
    if value_range == 0:
        raise DegenerateSample("constant values")
    path = nn_tour(X)
    diffs = np.diff(y[path])
    grid = ic_grid(value_range)
    H, M = ic_curves(diffs, grid)
    k_max = int(np.argmax(H))
    settle = grid[int(np.argmax(H < IC_SETTLE))]
    m0 = float(M[0])
    above = grid[M > IC_RATIO * m0]
    ratio_eps = above.max() if above.size else 0.0

    def lg(e):
        # log10(0) is not a usable feature value
        return math.log10(e) if e > 0 else float("nan")

    return {
        "ic.h.max": float(H[k_max]),
        "ic.eps.s": lg(settle),
        "ic.eps.max": float(grid[k_max]),
        "ic.eps.ratio": lg(ratio_eps),
        "ic.m0": m0,
    }


FEATURE_SETS = {
    "ela_distr": features_distr,
    "ela_meta": features_meta,
    "disp": features_disp,
    "nbc": features_nbc,
    "pca": features_pca,
    "ic": features_ic,
}


def compute_features(X, y, sets=None) -> dict:
    """All requested feature sets; a set that cannot be computed is marked
    invalid (NaN) instead of aborting."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    out = {}
    for name in sets or FEATURE_SETS:
        try:
            out.update(FEATURE_SETS[name](X, y))
        except (DegenerateSample, SingularFit):
            out.update({k: float("nan") for k in FEATURE_NAMES[name]})
    return out
