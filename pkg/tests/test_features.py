import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from driftwatch import (
    ClusterModel,
    MicroCluster,
    StreamElement,
    mc_centroid,
    mc_from_point,
    mc_from_points,
    mc_merge,
    mc_radius,
    parse_snapshot_line,
    point_centroid_distance,
    snapshot_line,
)


def element(values, t=0.0, i=0):
    return StreamElement(tuple(float(v) for v in values), t, i)


point_sets = st.integers(1, 60).flatmap(
    lambda n: st.integers(1, 6).flatmap(
        lambda d: st.lists(
            st.lists(st.floats(-50, 50), min_size=d, max_size=d),
            min_size=n,
            max_size=n,
        )
    )
)


class TestFromPoint:
    def test_direct_substitution(self):
        m = mc_from_point(element((3.0, 4.0), t=2.0))
        assert m.n == 1
        assert m.ls.tolist() == [3.0, 4.0]
        assert m.ss.tolist() == [9.0, 16.0]
        assert m.ts == 2.0 and m.tss == 4.0

    def test_zero_point(self):
        m = mc_from_point(element((0.0, 0.0, 0.0), t=0.0))
        assert m.n == 1
        assert not m.ls.any() and not m.ss.any()
        assert m.ts == 0.0 and m.tss == 0.0

    def test_squares(self):
        m = mc_from_point(element((1.5, -2.0), t=10.0))
        assert m.ss.tolist() == [2.25, 4.0]
        assert m.tss == 100.0


class TestMerge:
    def test_additivity(self):
        a = mc_from_point(element((1.0, 0.0)))
        b = mc_from_point(element((3.0, 0.0)))
        m = mc_merge(a, b)
        assert m.n == 2
        assert m.ls.tolist() == [4.0, 0.0]

    def test_empty_is_identity(self):
        x = mc_from_point(element((2.0, -1.0), t=3.0))
        m = mc_merge(x, MicroCluster.empty(2))
        assert m.n == x.n
        np.testing.assert_array_equal(m.ls, x.ls)
        np.testing.assert_array_equal(m.ss, x.ss)
        assert m.ts == x.ts and m.tss == x.tss

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mc_merge(MicroCluster.empty(2), MicroCluster.empty(3))

    def test_matches_raw_union_on_random_sets(self):
        # oracle: recompute every sum from the concatenated raw points
        rng = np.random.default_rng(42)
        for _ in range(100):
            d = rng.integers(1, 11)
            na, nb = rng.integers(1, 50, size=2)
            a = rng.normal(scale=10, size=(na, d))
            b = rng.normal(scale=10, size=(nb, d))
            ta, tb = rng.uniform(0, 100, na), rng.uniform(0, 100, nb)
            merged = mc_merge(mc_from_points(a, ta), mc_from_points(b, tb))
            union = np.vstack([a, b])
            assert merged.n == na + nb
            np.testing.assert_allclose(merged.ls, union.sum(axis=0), rtol=1e-9)
            np.testing.assert_allclose(merged.ss, (union**2).sum(axis=0), rtol=1e-9)
            assert math.isclose(merged.ts, ta.sum() + tb.sum(), rel_tol=1e-9)
            assert math.isclose(merged.tss, (ta**2).sum() + (tb**2).sum(), rel_tol=1e-9)

    @given(point_sets, st.integers(1, 59))
    def test_merge_equals_union_summary(self, points, cut):
        pts = np.asarray(points)
        cut = min(cut, len(pts) - 1)
        if cut < 1:
            return
        ts = np.arange(len(pts), dtype=float)
        merged = mc_merge(mc_from_points(pts[:cut], ts[:cut]), mc_from_points(pts[cut:], ts[cut:]))
        whole = mc_from_points(pts, ts)
        np.testing.assert_allclose(merged.ls, whole.ls, rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(merged.ss, whole.ss, rtol=1e-9, atol=1e-9)
        assert merged.n == whole.n
        assert math.isclose(merged.ts, whole.ts, rel_tol=1e-9, abs_tol=1e-9)
        assert math.isclose(merged.tss, whole.tss, rel_tol=1e-9, abs_tol=1e-9)

    @given(point_sets)
    def test_merge_commutes(self, points):
        pts = np.asarray(points)
        ts = np.zeros(len(pts))
        a = mc_from_points(pts, ts)
        b = mc_from_point(element(pts[0]))
        ab, ba = mc_merge(a, b), mc_merge(b, a)
        np.testing.assert_allclose(ab.ls, ba.ls, rtol=1e-12)
        np.testing.assert_allclose(ab.ss, ba.ss, rtol=1e-12)


class TestCentroidRadius:
    def test_midpoint(self):
        m = mc_from_points(np.array([[0.0, 0.0], [2.0, 2.0]]), np.zeros(2))
        assert mc_centroid(m).tolist() == [1.0, 1.0]

    def test_single_point_identity(self):
        m = mc_from_point(element((3.5, -1.0)))
        assert mc_centroid(m).tolist() == [3.5, -1.0]
        assert mc_radius(m) == 0.0

    def test_hand_radius(self):
        m = mc_from_points(np.array([[-1.0, 0.0], [1.0, 0.0]]), np.zeros(2))
        assert mc_centroid(m).tolist() == [0.0, 0.0]
        assert mc_radius(m) == 1.0

    def test_centroid_matches_direct_mean(self):
        rng = np.random.default_rng(7)
        pts = rng.normal(scale=5, size=(500, 4))
        m = mc_from_points(pts, np.zeros(500))
        np.testing.assert_allclose(mc_centroid(m), pts.mean(axis=0), rtol=1e-9)

    def test_radius_matches_direct_rms(self):
        rng = np.random.default_rng(8)
        pts = rng.normal(scale=3, size=(500, 10))
        m = mc_from_points(pts, np.zeros(500))
        direct = math.sqrt(((pts - pts.mean(axis=0)) ** 2).sum(axis=1).mean())
        assert math.isclose(mc_radius(m), direct, rel_tol=1e-6)

    def test_empty_errors(self):
        with pytest.raises(ValueError):
            mc_centroid(MicroCluster.empty(2))
        with pytest.raises(ValueError):
            mc_radius(MicroCluster.empty(2))

    @given(point_sets)
    def test_cf_consistency(self, points):
        pts = np.asarray(points)
        m = mc_from_points(pts, np.zeros(len(pts)))
        mean = pts.mean(axis=0)
        rms = math.sqrt(((pts - mean) ** 2).sum(axis=1).mean())
        np.testing.assert_allclose(mc_centroid(m), mean, rtol=1e-6, atol=1e-6)
        assert math.isclose(mc_radius(m), rms, rel_tol=1e-6, abs_tol=1e-6)

    @given(point_sets, st.lists(st.floats(-100, 100), min_size=1, max_size=6))
    def test_radius_translation_invariant(self, points, shift):
        pts = np.asarray(points)
        shift = np.resize(np.asarray(shift), pts.shape[1])
        r0 = mc_radius(mc_from_points(pts, np.zeros(len(pts))))
        r1 = mc_radius(mc_from_points(pts + shift, np.zeros(len(pts))))
        scale = max(1.0, float(np.abs(pts + shift).max()))
        assert abs(r0 - r1) <= 1e-9 * scale


class TestDistance:
    def test_three_four_five(self):
        assert point_centroid_distance(element((0.0, 0.0)), np.array([3.0, 4.0])) == 5.0

    def test_zero_at_centroid(self):
        assert point_centroid_distance(element((2.0, 2.0)), np.array([2.0, 2.0])) == 0.0

    def test_matches_componentwise_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            x, c = rng.normal(size=10), rng.normal(size=10)
            oracle = math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(c, x)))
            assert math.isclose(point_centroid_distance(element(x), c), oracle, rel_tol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            point_centroid_distance(element((1.0,)), np.array([1.0, 2.0]))


class TestMicroClusterInvariants:
    def test_empty_must_be_zero(self):
        with pytest.raises(ValueError):
            MicroCluster(0, np.array([1.0]), np.array([0.0]), 0.0, 0.0)

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            MicroCluster(-1, np.array([0.0]), np.array([0.0]), 0.0, 0.0)

    @given(point_sets)
    def test_cauchy_schwarz_per_dimension(self, points):
        pts = np.asarray(points)
        m = mc_from_points(pts, np.zeros(len(pts)))
        bound = m.ls**2 / m.n
        assert (m.ss - bound >= -1e-9 * np.maximum(1.0, np.abs(m.ss))).all()


class TestClusterModel:
    def test_rejects_empty_clusters(self):
        with pytest.raises(ValueError):
            ClusterModel.from_clusters([MicroCluster.empty(2)])

    def test_rejects_no_clusters(self):
        with pytest.raises(ValueError):
            ClusterModel.from_clusters([])

    def test_derived_fields_consistent(self):
        rng = np.random.default_rng(3)
        groups = [rng.normal(loc=c, size=(20, 3)) for c in (0.0, 5.0)]
        model = ClusterModel.from_clusters(
            mc_from_points(g, np.zeros(len(g))) for g in groups
        )
        for i, m in enumerate(model.clusters):
            np.testing.assert_allclose(model.centroids[i], mc_centroid(m), rtol=1e-9)
            assert math.isclose(float(model.radii[i]), mc_radius(m), rel_tol=1e-9)


class TestSnapshotSerialization:
    def build_model(self):
        rng = np.random.default_rng(11)
        groups = [rng.normal(loc=c, size=(15, 2)) for c in (0.0, 8.0, -3.0)]
        return ClusterModel.from_clusters(
            mc_from_points(g, rng.uniform(0, 9, len(g))) for g in groups
        )

    def test_round_trip_is_byte_identical(self):
        model = self.build_model()
        line = snapshot_line(42, model)
        at_index, loaded = parse_snapshot_line(line)
        assert at_index == 42
        assert snapshot_line(at_index, loaded) == line

    def test_reload_recomputation_matches(self):
        line = snapshot_line(0, self.build_model())
        _, loaded = parse_snapshot_line(line)
        for i, m in enumerate(loaded.clusters):
            np.testing.assert_allclose(loaded.centroids[i], mc_centroid(m), rtol=1e-9)

    def test_corrupt_centroid_rejected(self):
        import json

        obj = json.loads(snapshot_line(0, self.build_model()))
        obj["clusters"][0]["centroid"][0] += 0.5
        with pytest.raises(ValueError, match="centroid"):
            parse_snapshot_line(json.dumps(obj))

    def test_corrupt_radius_rejected(self):
        import json

        obj = json.loads(snapshot_line(0, self.build_model()))
        obj["clusters"][1]["radius"] *= 2.0
        with pytest.raises(ValueError, match="radius"):
            parse_snapshot_line(json.dumps(obj))

    def test_garbage_line_rejected(self):
        with pytest.raises(ValueError):
            parse_snapshot_line("not json at all")
