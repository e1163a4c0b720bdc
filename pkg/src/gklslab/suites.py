"""Canonical GKLS classes, their higher-dimensional extensions, and the
randomized "mod" class."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .generator import GklsProblem, GklsSpec, InvalidSpec, PlacementFailure, generate_problem
from .rng import derive_seed, make_rng

CANONICAL_CLASS_SIZE = 100
MOD_CLASS_SIZE = 50
MOD_MAX_DRAWS = 10**6

# class id -> (difficulty, dim, d, r); all rows are type D, f* = -1, h = 10
CANONICAL_TABLE = {
    1: ("simple", 2, 0.90, 0.20),
    2: ("hard", 2, 0.90, 0.10),
    3: ("simple", 3, 0.66, 0.20),
    4: ("hard", 3, 0.90, 0.20),
    5: ("simple", 4, 0.66, 0.20),
    6: ("hard", 4, 0.90, 0.20),
    7: ("simple", 5, 0.66, 0.30),
    8: ("hard", 5, 0.66, 0.20),
}


class UnknownClass(KeyError):
    pass


class SamplerFailure(RuntimeError):
    pass


def canonical_class(class_id: int, class_seed: int = 0) -> GklsSpec:
    if class_id not in CANONICAL_TABLE:
        raise UnknownClass(f"canonical classes are 1..8, got {class_id}")
    _, dim, d, r = CANONICAL_TABLE[class_id]
    return GklsSpec("D", dim, 10, -1.0, d, r, class_seed)


def extended_class(dim: int, difficulty: str, class_seed: int = 0) -> GklsSpec:
    """The dimension-5 simple/hard parameters (classes 7 and 8) at any dimension."""
    if dim < 2:
        raise InvalidSpec("dim must be >= 2")
    ids = {"simple": 7, "hard": 8}
    if difficulty not in ids:
        raise ValueError(f"difficulty must be 'simple' or 'hard', got {difficulty!r}")
    base = canonical_class(ids[difficulty], class_seed)
    return GklsSpec("D", dim, base.num_minima, base.global_value,
                    base.dist_to_vertex, base.global_radius, class_seed)


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def _ratio_radius(d: float, u: int) -> float:
    """r = d / u, moved by an ulp where needed so that r / d stays inside
    [1/10, 1/2] in floating point too (d / 10 / d can round to 0.0999...)."""
    r = d / u
    while d > 0 and r / d < 0.1:
        r = float(np.nextafter(r, np.inf))
    while d > 0 and r / d > 0.5:
        r = float(np.nextafter(r, -np.inf))
    return r


@dataclass
class ModSampleStats:
    """Bookkeeping for :func:`sample_mod_class_with_stats`.

    ``raw_types`` and ``raw_d`` hold every draw, including rejected ones.
    """

    draws: int = 0
    resampled: int = 0
    raw_types: list = field(default_factory=list)
    raw_d: list = field(default_factory=list)


def sample_mod_class_with_stats(dim: int, n: int = MOD_CLASS_SIZE, suite_seed: int = 0):
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(derive_seed("mod", dim, n, suite_seed))
    stats = ModSampleStats()
    specs = []
    while len(specs) < n:
        if stats.draws >= MOD_MAX_DRAWS:
            raise SamplerFailure(f"no valid spec after {MOD_MAX_DRAWS} draws")
        stats.draws += 1
        fn_type = "D" if rng.random() < 0.5 else "ND"
        d = float(rng.random())
        u = int(rng.integers(2, 11))
        c = float(rng.uniform(1.0, 3.0))
        stats.raw_types.append(fn_type)
        stats.raw_d.append(d)
        spec = GklsSpec(fn_type, dim, round_half_away(10.0**c), -1.0, d, _ratio_radius(d, u), suite_seed)
        try:
            spec.validate()
        except InvalidSpec:
            stats.resampled += 1
            continue
        specs.append(spec)
    return specs, stats


def sample_mod_class(dim: int, n: int = MOD_CLASS_SIZE, suite_seed: int = 0) -> list[GklsSpec]:
    """Draw ``n`` mod-class recipes: coin-flip type, d ~ U[0, 1], r = d / u with
    u uniform on {2..10}, h = round(10**c) with c ~ U[1, 3], f* = -1.

    Invalid draws are discarded and the whole tuple redrawn.
    """
    return sample_mod_class_with_stats(dim, n, suite_seed)[0]


@dataclass
class SuiteManifest:
    """A named list of ``(spec, count)`` entries.

    Problems are numbered 1..N across all entries in order, and that number
    is the ``problem_index`` each one is generated with.
    """

    name: str
    dim: int
    entries: list[tuple[GklsSpec, int]]
    suite_seed: int = 0

    def __len__(self) -> int:
        return sum(count for _, count in self.entries)

    def indexed_specs(self):
        k = 0
        for spec, count in self.entries:
            for _ in range(count):
                k += 1
                yield k, spec

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "suite_seed": self.suite_seed,
            "specs": [{"spec": s.to_dict(), "count": c} for s, c in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteManifest":
        entries = [(GklsSpec.from_dict(e["spec"]), int(e["count"])) for e in data["specs"]]
        return cls(data["name"], int(data["dim"]), entries, int(data.get("suite_seed", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "SuiteManifest":
        return cls.from_dict(json.loads(text))


def canonical_manifest(class_id: int, count: int = CANONICAL_CLASS_SIZE, suite_seed: int = 0):
    spec = canonical_class(class_id, suite_seed)
    return SuiteManifest(f"class{class_id}", spec.dim, [(spec, count)], suite_seed)


def extended_manifest(dim: int, difficulty: str, count: int = CANONICAL_CLASS_SIZE,
                      suite_seed: int = 0):
    spec = extended_class(dim, difficulty, suite_seed)
    return SuiteManifest(f"{difficulty}{dim}", dim, [(spec, count)], suite_seed)


def mod_manifest(dim: int, count: int = MOD_CLASS_SIZE, suite_seed: int = 0):
    specs = sample_mod_class(dim, count, suite_seed)
    return SuiteManifest(f"mod{dim}", dim, [(s, 1) for s in specs], suite_seed)


def materialize(manifest: SuiteManifest) -> list[GklsProblem]:
    problems = []
    for index, spec in manifest.indexed_specs():
        try:
            problems.append(generate_problem(spec, index))
        except PlacementFailure as err:
            raise PlacementFailure(f"{manifest.name} problem {index}: {err}", index) from err
    return problems


def suite_summary(problems: list[GklsProblem]) -> dict:
    """Placement statistics printed by the CLI."""
    if not problems:
        return {"problems": 0}
    radii = np.concatenate([p.radii[1:] for p in problems]) if problems else np.array([])
    return {
        "problems": len(problems),
        "minima_total": int(sum(p.spec.num_minima for p in problems)),
        "local_radius_min": float(radii.min()) if radii.size else None,
        "local_radius_mean": float(radii.mean()) if radii.size else None,
    }
