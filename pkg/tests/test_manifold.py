import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from wsn3d.errors import InvalidRange, KTooLarge, SingularGram
from wsn3d.manifold import (
    CostParams, Embedding2D, embed, embed_terrain, embedding_matrix, knn, reconstruction_weights,
    cost_value,
)
from wsn3d.terrain import random_terrain


def brute_knn(points, k):
    out = []
    for i, p in enumerate(points):
        cand = sorted(
            (math.dist(p, q), j) for j, q in enumerate(points) if j != i
        )
        out.append([j for _, j in cand[:k]])
    return np.array(out)


def kkt_weights(points, i, nbrs, reg):
    """Regularised constrained least squares via the KKT system."""
    z = points[nbrs] - points[i]
    k = len(nbrs)
    gram = z @ z.T
    tr = np.trace(gram)
    gram = gram + (reg * tr / k if tr > 0 else reg) * np.eye(k)
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2 * gram
    kkt[:k, k] = 1
    kkt[k, :k] = 1
    rhs = np.zeros(k + 1)
    rhs[k] = 1
    return np.linalg.solve(kkt, rhs)[:k]


def jaccard_preservation(a, b, k):
    na, nb = brute_knn(a, k), brute_knn(b, k)
    return np.mean([len(set(x) & set(y)) / len(set(x) | set(y)) for x, y in zip(na, nb)])


def tilted_plane(n_side=20):
    u, v = np.meshgrid(np.arange(n_side, dtype=float), np.arange(n_side, dtype=float), indexing="ij")
    flat = np.column_stack([u.ravel(), v.ravel(), np.zeros(n_side * n_side)])
    rot = Rotation.from_euler("xyz", [0.6, -0.4, 0.3]).as_matrix()
    return flat @ rot.T + np.array([3.0, -2.0, 7.0]), flat[:, :2]


class TestKnn:
    def test_collinear(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [3.0, 0, 0]])
        assert knn(pts, 1).indices[1, 0] == 0

    def test_unit_square(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [1.0, 1, 0]])
        idx = knn(pts, 2).indices
        assert [set(r) for r in idx] == [{1, 2}, {0, 3}, {0, 3}, {1, 2}]

    def test_index_tie_break(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [-1.0, 0, 0], [0.0, 1, 0]])
        assert list(knn(pts, 3).indices[0]) == [1, 2, 3]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_against_brute_force(self, seed):
        pts = np.random.default_rng(seed).random((100, 3))
        table = knn(pts, 6)
        np.testing.assert_array_equal(table.indices, brute_knn(pts, 6))
        assert np.all(np.diff(table.distances, axis=1) >= 0)

    def test_lattice_ties(self):
        t = random_terrain(0, 3, 7, 6)
        pts = t.points()
        np.testing.assert_array_equal(knn(pts, 8).indices, brute_knn(pts, 8))

    def test_excludes_self(self):
        pts = np.random.default_rng(1).random((30, 3))
        idx = knn(pts, 5).indices
        assert not np.any(idx == np.arange(30)[:, None])

    def test_k_too_large(self):
        with pytest.raises(KTooLarge):
            knn(np.zeros((4, 3)), 4)


class TestWeights:
    def test_midpoint(self):
        pts = np.array([[1.0, 1, 1], [0.0, 0, 0], [2.0, 2, 2]])
        w = reconstruction_weights(pts, knn(pts, 2), reg=1e-3).row_weights()
        np.testing.assert_allclose(w[0], [0.5, 0.5], atol=1e-12)

    def test_coincident_neighbour(self):
        pts = np.array([[0.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0], [5.0, 5, 5]])
        nbrs = knn(pts, 2)
        w = reconstruction_weights(pts, nbrs, reg=1e-3).row_weights()
        oracle = kkt_weights(pts, 0, nbrs.indices[0], 1e-3)
        np.testing.assert_allclose(w[0], oracle, atol=1e-12)
        assert nbrs.indices[0, int(np.argmax(w[0]))] == 1
        assert w[0].max() > 1 - 1e-3

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_kkt_oracle(self, seed):
        pts = np.random.default_rng(seed).random((40, 3))
        nbrs = knn(pts, 7)
        w = reconstruction_weights(pts, nbrs).row_weights()
        for i in range(40):
            np.testing.assert_allclose(w[i], kkt_weights(pts, i, nbrs.indices[i], 1e-3), atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32), st.integers(2, 10))
    def test_rows_sum_to_one(self, seed, k):
        pts = np.random.default_rng(seed).normal(size=(30, 3))
        w = reconstruction_weights(pts, knn(pts, k))
        np.testing.assert_allclose(np.asarray(w.matrix.sum(axis=1)).ravel(), 1.0, atol=1e-10)
        assert np.all(w.matrix.diagonal() == 0)

    def test_singular_without_reg(self):
        pts = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0]])
        with pytest.raises(SingularGram):
            reconstruction_weights(pts, knn(pts, 3), reg=0.0)

    def test_negative_reg(self):
        pts = np.random.default_rng(0).random((5, 3))
        with pytest.raises(InvalidRange):
            reconstruction_weights(pts, knn(pts, 2), reg=-1)

    def test_rigid_motion_invariance(self):
        pts = np.random.default_rng(3).random((120, 3))
        rot = Rotation.from_euler("zyx", [1.1, 0.2, -0.7]).as_matrix()
        moved = pts @ rot.T + np.array([10.0, -4.0, 2.5])
        a = reconstruction_weights(pts, knn(pts, 8)).matrix.toarray()
        b = reconstruction_weights(moved, knn(moved, 8)).matrix.toarray()
        assert np.abs(a - b).max() <= 1e-8


class TestEmbed:
    def _weights(self, pts, k):
        return reconstruction_weights(pts, knn(pts, k))

    def test_smallest_eigenpair_is_constant(self):
        pts = np.random.default_rng(2).random((80, 3))
        m = embedding_matrix(self._weights(pts, 6))
        vals, vecs = np.linalg.eigh(m)
        assert abs(vals[0]) < 1e-10
        v = vecs[:, 0] * np.sign(vecs[0, 0])
        np.testing.assert_allclose(v, 1 / np.sqrt(80), atol=1e-6)

    @pytest.mark.parametrize("seed", range(3))
    def test_against_dense_oracle(self, seed):
        pts = np.random.default_rng(seed).random((150, 3))
        w = self._weights(pts, 8)
        e = embed(w, scale="none")
        dense_w = np.zeros((150, 150))
        for i, (cols, ws) in enumerate(zip(w.neighbors.indices, w.row_weights())):
            dense_w[i, cols] = ws
        # eigenpairs of (I - W)^T (I - W) from the SVD of I - W
        _, sv, vt = np.linalg.svd(np.eye(150) - dense_w)
        vals, vecs = sv[::-1] ** 2, vt[::-1].T
        np.testing.assert_allclose(e.eigenvalues, vals[1:3], rtol=1e-8)
        for c in range(2):
            assert abs(abs(e.coords[:, c] @ vecs[:, c + 1]) - 1) < 1e-6

    def test_centered_and_sized(self):
        t = random_terrain(4, 5, 8, 9)
        e = embed_terrain(t, k=6)
        assert e.coords.shape == (72, 2)
        np.testing.assert_allclose(e.coords.mean(axis=0), 0, atol=1e-8)
        assert e.dims == (8, 9)
        np.testing.assert_array_equal(e.altitudes, t.heights.ravel())

    def test_sign_convention(self):
        pts = np.random.default_rng(5).random((60, 3))
        e = embed(self._weights(pts, 6), scale="none")
        for c in range(2):
            col = e.coords[:, c] + 0  # mean removed; pivot sign is still positive
            assert col[np.argmax(np.abs(col))] > 0

    def test_tilted_plane_neighbourhoods(self):
        pts, flat = tilted_plane()
        e = embed(self._weights(pts, 8), points=pts)
        assert jaccard_preservation(flat, e.coords, 8) >= 0.9

    def test_metric_scale_matches_grid_spacing(self):
        pts, flat = tilted_plane(15)
        e = embed(self._weights(pts, 8), points=pts)
        d = np.linalg.norm(e.coords[1] - e.coords[0])
        assert d == pytest.approx(1.0, rel=0.2)

    def test_unit_scale(self):
        pts = np.random.default_rng(8).random((90, 3))
        e = embed(self._weights(pts, 7), scale="unit")
        np.testing.assert_allclose(e.coords.std(axis=0), 1.0, rtol=1e-6)

    def test_rigid_motion_gives_same_embedding(self):
        pts = np.random.default_rng(9).random((100, 3))
        rot = Rotation.from_euler("zyx", [0.4, 1.2, -0.3]).as_matrix()
        moved = pts @ rot.T + 5.0
        a = embed(self._weights(pts, 8), points=pts)
        b = embed(self._weights(moved, 8), points=moved)
        np.testing.assert_allclose(np.abs(a.coords), np.abs(b.coords), atol=1e-6)


class TestCostValue:
    def _emb(self):
        coords = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]])
        return Embedding2D(coords, np.array([5.0, 7.0, 5.0]), (3, 1))

    def test_self_is_zero(self):
        e = self._emb()
        for mode in ("printed", "slope"):
            assert cost_value(e, 1, 1, CostParams(mode=mode)) == 0

    def test_printed(self):
        assert cost_value(self._emb(), 0, 1, CostParams(mode="printed")) == 2.0

    def test_slope_flat_pair(self):
        assert cost_value(self._emb(), 0, 2, CostParams(mode="slope")) == 0.0

    def test_printed_flat_pair_is_clamped(self):
        assert cost_value(self._emb(), 0, 2, CostParams(mode="printed")) == pytest.approx(3e9)

    @given(st.integers(0, 2), st.integers(0, 2), st.sampled_from(["printed", "slope"]))
    def test_symmetric(self, i, j, mode):
        e = self._emb()
        p = CostParams(mode=mode)
        assert cost_value(e, i, j, p) == cost_value(e, j, i, p)

    def test_params_validated(self):
        with pytest.raises(InvalidRange):
            CostParams(a=0)
        with pytest.raises(InvalidRange):
            CostParams(mode="steep")
