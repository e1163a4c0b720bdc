import numpy as np
import pytest
from scipy import stats as sps

from gklslab.generator import GklsSpec
from oracles import mod_h_bin_probabilities
from gklslab.suites import (
    SuiteManifest,
    UnknownClass,
    canonical_class,
    canonical_manifest,
    extended_class,
    materialize,
    mod_manifest,
    round_half_away,
    sample_mod_class,
    sample_mod_class_with_stats,
)


@pytest.mark.parametrize(
    "cid,dim,d,r",
    [(1, 2, 0.9, 0.2), (2, 2, 0.9, 0.1), (3, 3, 0.66, 0.2), (4, 3, 0.9, 0.2),
     (5, 4, 0.66, 0.2), (6, 4, 0.9, 0.2), (7, 5, 0.66, 0.3), (8, 5, 0.66, 0.2)],
)
def test_canonical_table(cid, dim, d, r):
    assert canonical_class(cid) == GklsSpec("D", dim, 10, -1.0, d, r)


@pytest.mark.parametrize("cid", [0, 9, -1])
def test_unknown_class(cid):
    with pytest.raises(UnknownClass):
        canonical_class(cid)


def test_extended_classes():
    assert extended_class(10, "simple") == GklsSpec("D", 10, 10, -1.0, 0.66, 0.3)
    assert extended_class(10, "hard") == GklsSpec("D", 10, 10, -1.0, 0.66, 0.2)
    assert extended_class(5, "simple") == canonical_class(7)
    assert extended_class(5, "hard") == canonical_class(8)
    with pytest.raises(ValueError):
        extended_class(10, "medium")


def test_round_half_away():
    assert round_half_away(10.5) == 11
    assert round_half_away(11.5) == 12
    assert round_half_away(10.49) == 10
    assert round_half_away(-2.5) == -3


def test_mod_class_bounds_and_reproducibility():
    specs = sample_mod_class(5, 50, suite_seed=3)
    assert len(specs) == 50
    assert specs == sample_mod_class(5, 50, suite_seed=3)
    assert specs != sample_mod_class(5, 50, suite_seed=4)
    for s in specs:
        s.validate()
        assert 10 <= s.num_minima <= 1000
        assert s.global_value == -1.0
        assert s.fn_type in ("D", "ND")
        ratio = s.global_radius / s.dist_to_vertex
        assert any(ratio == pytest.approx(1 / u, rel=1e-15) for u in range(2, 11))


def test_mod_class_large_sample_statistics():
    specs, stats = sample_mod_class_with_stats(5, 10_000, suite_seed=0)
    p_nd = np.mean([t == "ND" for t in stats.raw_types])
    assert 0.48 <= p_nd <= 0.52
    assert 0.48 <= np.mean(stats.raw_d) <= 0.52
    assert stats.draws == 10_000 + stats.resampled
    edges = np.linspace(1, 3, 11)
    counts, _ = np.histogram(np.log10([s.num_minima for s in specs]), bins=edges)
    expected = mod_h_bin_probabilities(edges) * len(specs)
    assert sps.chisquare(counts, expected).pvalue > 0.01


def test_manifest_roundtrip_and_materialize():
    m = mod_manifest(5, 4, suite_seed=1)
    back = SuiteManifest.from_json(m.to_json())
    assert back.to_dict() == m.to_dict()
    a = materialize(m)
    b = materialize(back)
    assert len(a) == 4
    assert [p.to_json() for p in a] == [p.to_json() for p in b]
    assert [p.problem_index for p in a] == [1, 2, 3, 4]


def test_empty_manifest():
    assert materialize(SuiteManifest("empty", 2, [])) == []


def test_canonical_class_one_materializes_100_problems():
    problems = materialize(canonical_manifest(1))
    assert len(problems) == 100
    assert all(p.dim == 2 for p in problems)
    assert len({tuple(p.vertex) for p in problems}) == 100


def test_rounding_null_is_a_distribution():
    probs = mod_h_bin_probabilities(np.linspace(1, 3, 11))
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    # rounding pushes mass out of the first bin
    assert probs[0] == pytest.approx((np.log10(15.5) - 1) / 2, abs=1e-12)


def test_mod_radius_ratio_bounds_hold_in_floating_point():
    # d / 10 / d rounds below 0.1 for some d unless the radius is nudged
    specs = sample_mod_class(5, 10**4, suite_seed=0)
    ratios = np.array([s.global_radius / s.dist_to_vertex for s in specs])
    assert ratios.min() >= 0.1 and ratios.max() <= 0.5
    # the nudge is at most an ulp or so
    for s in specs[:500]:
        u = round(s.dist_to_vertex / s.global_radius)
        assert abs(s.global_radius - s.dist_to_vertex / u) <= 2 * np.spacing(s.global_radius)
