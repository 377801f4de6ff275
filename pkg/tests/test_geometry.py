import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stickysym.errors import OverlapError, RadiiMismatchError
from stickysym.geometry import (
    Cluster,
    Partition,
    apply_pi,
    build_constraint_system,
    cluster_from_json,
    cluster_to_json,
    detect_contacts,
    distance_matrix,
    load_cluster,
    pair_targets,
    save_cluster,
    squared_distances,
)
from stickysym.groups import PIOperation


def ring_adjacency(n):
    A = np.zeros((n, n), dtype=np.int8)
    for k in range(n):
        A[k, (k + 1) % n] = A[(k + 1) % n, k] = 1
    return A


class TestCluster:
    def test_basic(self, hexagon):
        assert hexagon.n_spheres == 6
        assert hexagon.flat().shape == (18,)
        np.testing.assert_allclose(
            hexagon.centered().positions.mean(axis=0), 0.0, atol=1e-12
        )

    def test_positions_read_only(self, hexagon):
        with pytest.raises(ValueError):
            hexagon.positions[0, 0] = 9.9

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            Cluster(np.zeros((3, 2)), np.full(3, 0.5))
        with pytest.raises(ValueError):
            Cluster(np.zeros((3, 3)), np.full(4, 0.5))
        with pytest.raises(ValueError):
            Cluster(np.zeros((3, 3)), np.array([0.5, 0.5, -0.1]))


class TestDistances:
    def test_hexagon_squared_distances(self, hexagon):
        # unit hexagon has squared pair distances 1 (side), 3 (skip), 4
        # (diameter) only
        d2 = squared_distances(hexagon.positions)
        iu = np.triu_indices(6, k=1)
        values = sorted(set(np.round(d2[iu], 12)))
        np.testing.assert_allclose(values, [1.0, 3.0, 4.0], atol=1e-12)

    def test_distance_matrix_is_squared(self, hexagon):
        D = distance_matrix(hexagon)
        assert D[0, 0] == 0.0
        np.testing.assert_allclose(D[0, 1], 1.0, atol=1e-12)
        np.testing.assert_allclose(D[0, 3], 4.0, atol=1e-12)

    def test_pair_targets(self):
        radii = np.array([0.5, 0.3, 0.7])
        T = pair_targets(radii)
        np.testing.assert_allclose(T[0, 1], 0.8**2)
        np.testing.assert_allclose(T[1, 2], 1.0)
        np.testing.assert_allclose(T, T.T)


class TestDetectContacts:
    def test_hexagon_is_a_ring(self, hexagon):
        np.testing.assert_array_equal(detect_contacts(hexagon), ring_adjacency(6))

    def test_near_contact_within_eps(self):
        pos = np.array([[0.0, 0.0, 0.0], [1.0 + 5e-9, 0.0, 0.0]])
        c = Cluster(pos, np.full(2, 0.5))
        assert detect_contacts(c)[0, 1] == 1

    def test_separated_pair(self):
        pos = np.array([[0.0, 0.0, 0.0], [1.2, 0.0, 0.0]])
        c = Cluster(pos, np.full(2, 0.5))
        assert detect_contacts(c)[0, 1] == 0

    def test_overlap_raises_with_pair(self):
        pos = np.array([[0.0, 0.0, 0.0], [0.9, 0.0, 0.0]])
        c = Cluster(pos, np.full(2, 0.5))
        with pytest.raises(OverlapError) as err:
            detect_contacts(c)
        assert {err.value.i, err.value.j} == {0, 1}


class TestApplyPi:
    def test_identity(self, hexagon):
        out = apply_pi(hexagon, PIOperation.identity(6))
        np.testing.assert_array_equal(out.positions, hexagon.positions)

    def test_inversion_flips(self, hexagon):
        out = apply_pi(hexagon, PIOperation.identity(6, sign=-1))
        np.testing.assert_array_equal(out.positions, -hexagon.positions)

    def test_gather_convention(self):
        # op.perm[i] names the sphere whose position lands in slot i
        pos = np.array([[1.0, 0, 0], [2.0, 0, 0], [3.0, 0, 0]])
        c = Cluster(pos, np.full(3, 0.5))
        op = PIOperation((1, 2, 0), 1)
        out = apply_pi(c, op)
        np.testing.assert_array_equal(out.positions[:, 0], [2.0, 3.0, 1.0])

    def test_radii_mismatch(self):
        pos = np.array([[0.0, 0, 0], [1.0, 0, 0]])
        c = Cluster(pos, np.array([0.6, 0.4]))
        with pytest.raises(RadiiMismatchError):
            apply_pi(c, PIOperation((1, 0), 1))

    @given(
        seed=st.integers(0, 2**31),
        n=st.integers(3, 7),
        sign=st.sampled_from([1, -1]),
    )
    @settings(max_examples=40, deadline=None)
    def test_distance_matrix_conjugation(self, seed, n, sign):
        # D(apply_pi(x, (P, s))) == P D(x) P^T for any op: isometry identity
        rng = np.random.default_rng(seed)
        pos = rng.normal(size=(n, 3))
        c = Cluster(pos, np.full(n, 0.5))
        perm = tuple(int(v) for v in rng.permutation(n))
        op = PIOperation(perm, sign)
        D = distance_matrix(c)
        D_out = distance_matrix(apply_pi(c, op))
        P = np.eye(n)[list(perm)]
        np.testing.assert_allclose(D_out, P @ D @ P.T, atol=1e-10)


class TestPartition:
    def test_label_normalization(self):
        p = Partition.from_labels([7, 3, 7, 1])
        assert p.labels == (0, 1, 0, 2)

    def test_from_classes(self):
        p = Partition.from_classes([(0, 2), (1, 3)], 4)
        assert p.classes() == ((0, 2), (1, 3))
        with pytest.raises(ValueError):
            Partition.from_classes([(0, 1)], 4)  # not a cover

    def test_from_radii(self):
        p = Partition.from_radii(np.array([0.6, 0.4, 0.6, 0.4]))
        assert p.n_classes == 2
        assert Partition.from_radii(np.full(5, 0.5)).n_classes == 1

    def test_refines(self):
        fine = Partition.singletons(4)
        coarse = Partition.trivial(4)
        mid = Partition.from_labels([0, 0, 1, 1])
        assert fine.refines(mid) and mid.refines(coarse) and fine.refines(coarse)
        assert not coarse.refines(mid)
        assert mid.refines(mid)


class TestClusterConstraints:
    def test_residual_zero_on_manifold(self, hexagon):
        cs = build_constraint_system(ring_adjacency(6), hexagon.radii)
        y = hexagon.centered().flat()
        assert np.max(np.abs(cs.eq(y))) < 1e-12
        assert np.all(cs.ineq(y) > 0)
        assert cs.is_feasible(y, 1e-10)

    def test_dimensions(self, hexagon):
        cs = build_constraint_system(ring_adjacency(6), hexagon.radii)
        assert (cs.dim, cs.n_eq, cs.n_ineq) == (18, 9, 9)  # 6 contacts + 3 com
        free = build_constraint_system(ring_adjacency(6), hexagon.radii,
                                       fix_com=False)
        assert free.n_eq == 6

    def test_com_rows(self, hexagon):
        cs = build_constraint_system(ring_adjacency(6), hexagon.radii)
        shifted = hexagon.positions + np.array([0.1, -0.2, 0.3])
        res = cs.eq(shifted.reshape(-1))
        np.testing.assert_allclose(res[-3:], 6 * np.array([0.1, -0.2, 0.3]),
                                   atol=1e-12)

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=25, deadline=None)
    def test_jacobian_matches_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        cs = build_constraint_system(ring_adjacency(6), np.full(6, 0.5))
        ang = np.linspace(0.0, 2.0 * np.pi, 6, endpoint=False)
        pos = np.stack([np.cos(ang), np.sin(ang), np.zeros(6)], axis=1)
        y = pos.reshape(-1) + 0.05 * rng.normal(size=18)
        J = cs.eq_jac(y)
        h = 1e-6
        J_fd = np.empty_like(J)
        for k in range(cs.dim):
            e = np.zeros(cs.dim)
            e[k] = h
            J_fd[:, k] = (cs.eq(y + e) - cs.eq(y - e)) / (2 * h)
        scale = max(1.0, np.max(np.abs(J)))
        assert np.max(np.abs(J - J_fd)) / scale < 1e-6

    def test_ineq_counts_non_contacts(self, hexagon):
        cs = build_constraint_system(ring_adjacency(6), hexagon.radii)
        y = hexagon.centered().flat()
        # 15 pairs - 6 contacts = 9 strict clearances
        assert cs.ineq(y).shape == (9,)


class TestJsonIO:
    def test_round_trip(self, hexagon, tmp_path):
        path = tmp_path / "hex.json"
        save_cluster(str(path), hexagon, colors=[1, 1, 2, 2, 3, 3])
        loaded, colors = load_cluster(str(path))
        np.testing.assert_allclose(loaded.positions, hexagon.positions)
        np.testing.assert_allclose(loaded.radii, hexagon.radii)
        assert colors == [1, 1, 2, 2, 3, 3]

    def test_round_trip_no_colors(self, hexagon):
        c, colors = cluster_from_json(cluster_to_json(hexagon))
        assert colors is None
        np.testing.assert_allclose(c.positions, hexagon.positions)

    def test_malformed(self, tmp_path):
        with pytest.raises(ValueError):
            cluster_from_json({"positions": [[0, 0, 0]]})
        with pytest.raises(ValueError):
            cluster_from_json({"positions": "junk", "radii": [1]})
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2, 3]")
        with pytest.raises(ValueError):
            load_cluster(str(bad))
        bad.write_text("{not json")
        with pytest.raises(json.JSONDecodeError):
            load_cluster(str(bad))
