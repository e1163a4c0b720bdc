"""Feature matrices: cleaning, normalization, PCA and CSV exchange."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..bench import fmt
from .features import ALL_FEATURES

CORR_THRESHOLD = 0.95


class EverythingDropped(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class RankTooLow(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    suite: str
    problem: str
    values: dict


@dataclass(frozen=True)
class FeatureMatrix:
    suites: list
    problems: list
    names: list
    data: np.ndarray  # rows x names, NaN marks an invalid value
    dropped: dict = field(default_factory=dict)  # name -> reason
    scaling: tuple | None = None  # (method, offset, scale)

    @classmethod
    def from_vectors(cls, vectors, names=None) -> "FeatureMatrix":
        vectors = list(vectors)
        if names is None:
            seen = {k for v in vectors for k in v.values}
            names = [n for n in ALL_FEATURES if n in seen]
            names += sorted(seen - set(names))
        data = np.array(
            [[float(v.values.get(n, math.nan)) for n in names] for v in vectors], dtype=float
        ).reshape(len(vectors), len(names))
        return cls([v.suite for v in vectors], [v.problem for v in vectors], list(names), data)

    @property
    def shape(self):
        return self.data.shape

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.names.index(name)]

    def concat(self, other: "FeatureMatrix") -> "FeatureMatrix":
        """Stack rows; columns are the union (ours first), missing cells invalid."""
        names = list(self.names) + [n for n in other.names if n not in self.names]

        def widen(m):
            out = np.full((len(m.problems), len(names)), np.nan)
            for j, n in enumerate(m.names):
                out[:, names.index(n)] = m.data[:, j]
            return out

        return FeatureMatrix(
            self.suites + other.suites,
            self.problems + other.problems,
            names,
            np.vstack([widen(self), widen(other)]),
        )

    # CSV -------------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "problem"] + self.names)
        for s, p, row in zip(self.suites, self.problems, self.data):
            w.writerow([s, p] + ["NA" if math.isnan(v) else fmt(float(v)) for v in row])
        return buf.getvalue()


def parse_features(text: str) -> FeatureMatrix:
    """Parse ``suite,problem,<features...>`` CSV; NA (or empty) marks invalid."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(rows[0]):
        raise ParseError("empty feature file", row=1)
    header = rows[0]
    if header[:2] != ["suite", "problem"]:
        raise ParseError("header must start with suite,problem", row=1, column=1)
    names = header[2:]
    if len(set(names)) != len(names):
        raise ParseError("duplicate feature names in header", row=1)
    suites, problems, data = [], [], []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row=i)
        values = []
        for name, cell in zip(names, row[2:]):
            if cell in ("NA", ""):
                values.append(math.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=i, column=name) from None
        suites.append(row[0])
        problems.append(row[1])
        data.append(values)
    return FeatureMatrix(suites, problems, names, np.array(data, dtype=float).reshape(len(data), len(names)))


def import_features(path) -> FeatureMatrix:
    return parse_features(Path(path).read_text())


def export_features(matrix: FeatureMatrix, path) -> None:
    Path(path).write_text(matrix.to_csv())


# cleaning and scaling ----------------------------------------------------------


def clean_features(matrix: FeatureMatrix, corr_threshold: float = CORR_THRESHOLD) -> FeatureMatrix:
    """Drop invalid and constant columns, then greedily drop any column whose
    |correlation| with an already kept column reaches the threshold."""
    if matrix.data.shape[0] < 2:
        raise ValueError("cleaning needs at least 2 rows")
    dropped = dict(matrix.dropped)
    keep = []
    for j, name in enumerate(matrix.names):
        col = matrix.data[:, j]
        if not np.all(np.isfinite(col)):
            dropped[name] = "invalid"
        elif col.max() == col.min():
            dropped[name] = "constant"
        else:
            keep.append(j)
    kept = []
    for j in keep:
        col = matrix.data[:, j]
        for k in kept:
            c = abs(np.corrcoef(col, matrix.data[:, k])[0, 1])
            if c >= corr_threshold:
                dropped[matrix.names[j]] = f"correlated with {matrix.names[k]}"
                break
        else:
            kept.append(j)
    if not kept:
        raise EverythingDropped("no feature survived cleaning")
    return replace(
        matrix,
        names=[matrix.names[j] for j in kept],
        data=matrix.data[:, kept].copy(),
        dropped=dropped,
    )


def normalize(matrix: FeatureMatrix, method: str = "minmax") -> FeatureMatrix:
    """Per-feature scaling; ``minmax`` maps to [0, 1], ``zscore`` to mean 0, sd 1."""
    X = matrix.data
    if method == "minmax":
        offset = X.min(axis=0)
        scale = X.max(axis=0) - offset
    elif method == "zscore":
        offset = X.mean(axis=0)
        scale = X.std(axis=0, ddof=1)
    else:
        raise ValueError(f"unknown normalization {method!r}")
    scale = np.where(scale > 0, scale, 1.0)
    return replace(matrix, data=(X - offset) / scale, scaling=(method, offset, scale))


def denormalize(matrix: FeatureMatrix) -> FeatureMatrix:
    if matrix.scaling is None:
        return matrix
    _, offset, scale = matrix.scaling
    return replace(matrix, data=matrix.data * scale + offset, scaling=None)


# PCA ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # rows are orthonormal loadings, strongest first
    ratios: np.ndarray
    cumulative: np.ndarray
    k: int

    def project(self, X, k: int | None = None) -> np.ndarray:
        k = self.k if k is None else k
        return (np.asarray(X, dtype=float) - self.mean) @ self.components[:k].T

    def reconstruct(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        return Z @ self.components[: Z.shape[1]] + self.mean

    def report_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["component", "explained_variance_ratio", "cumulative"])
        for i, (r, c) in enumerate(zip(self.ratios, self.cumulative), start=1):
            w.writerow([i, fmt(float(r)), fmt(float(c))])
        return buf.getvalue()


def pca_fit(X, k: int):
    """Centered SVD; returns the model and the rows projected on ``k`` components."""
    X = np.asarray(getattr(X, "data", X), dtype=float)
    n, p = X.shape
    if not 1 <= k <= min(n - 1, p):
        raise RankTooLow(f"k={k} needs 1 <= k <= min(rows - 1, columns) = {min(n - 1, p)}")
    mean = X.mean(axis=0)
    _, s, Vt = np.linalg.svd(X - mean, full_matrices=False)
    power = s**2
    total = np.cumsum(power)
    if total[-1] == 0:
        raise RankTooLow("all rows are identical")
    # fix signs: largest-magnitude loading of each component positive
    flip = np.sign(Vt[np.arange(len(Vt)), np.argmax(np.abs(Vt), axis=1)])
    Vt = Vt * np.where(flip == 0, 1.0, flip)[:, None]
    model = PcaModel(mean, Vt, power / total[-1], total / total[-1], k)
    return model, model.project(X)


def embedding_csv(suites, problems, Y) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["suite", "problem", "x", "y"])
    for s, p, (a, b) in zip(suites, problems, np.asarray(Y, dtype=float)):
        w.writerow([s, p, fmt(float(a)), fmt(float(b))])
    return buf.getvalue()
