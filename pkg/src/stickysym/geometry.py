"""Cluster geometry: sphere packings, contacts, and constraint systems.

A cluster is a set of N labeled spheres given by centers (N, 3) and radii
(N,).  Two spheres are in contact when their center distance equals the sum
of their radii; they must never interpenetrate.  The contact graph induces a
system of equality constraints (one per contact) whose solution set, cut by
the non-overlap inequalities, is the configuration manifold explored by the
path-finding routines in `stickysym.manifold`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TYPE_CHECKING

import numpy as np

from .errors import OverlapError, RadiiMismatchError

if TYPE_CHECKING:  # pragma: no cover
    from .groups import PIOperation

# Pair tolerance for declaring a contact; pairs closer than target - EPS_CONTACT
# are treated as overlapping.
EPS_CONTACT = 1e-8


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Cluster:
    """Labeled hard-sphere cluster: center coordinates plus radii."""

    positions: np.ndarray  # (N, 3)
    radii: np.ndarray      # (N,)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        rad = np.asarray(self.radii, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be (N, 3), got {pos.shape}")
        if rad.shape != (pos.shape[0],):
            raise ValueError("radii must have one entry per sphere")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(rad))):
            raise ValueError("positions and radii must be finite")
        if np.any(rad <= 0):
            raise ValueError("radii must be positive")
        object.__setattr__(self, "positions", _readonly(pos))
        object.__setattr__(self, "radii", _readonly(rad))

    @property
    def n_spheres(self) -> int:
        return self.positions.shape[0]

    def centered(self) -> "Cluster":
        """Translate so the (unweighted) center of mass sits at the origin."""
        return Cluster(self.positions - self.positions.mean(axis=0), self.radii)

    def flat(self) -> np.ndarray:
        """Coordinates as a single vector of length 3N."""
        return self.positions.reshape(-1).copy()


def squared_distances(positions: np.ndarray) -> np.ndarray:
    """Matrix of squared center distances for an (N, 3) coordinate array."""
    diff = positions[:, None, :] - positions[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def distance_matrix(cluster: Cluster) -> np.ndarray:
    """Squared-distance matrix D with D[i, j] = |x_i - x_j|^2."""
    return squared_distances(cluster.positions)


def pair_targets(radii: np.ndarray) -> np.ndarray:
    """Matrix of squared contact distances (r_i + r_j)^2."""
    s = radii[:, None] + radii[None, :]
    return s * s


def detect_contacts(cluster: Cluster, eps_contact: float = EPS_CONTACT) -> np.ndarray:
    """Contact adjacency matrix of a cluster.

    A pair (i, j) is a contact when ||x_i - x_j| - (r_i + r_j)| <= eps_contact.
    Raises OverlapError when a pair sits strictly inside the contact distance
    beyond the tolerance.
    """
    pos, rad = cluster.positions, cluster.radii
    n = cluster.n_spheres
    dist = np.sqrt(squared_distances(pos))
    target = rad[:, None] + rad[None, :]
    adjacency = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(i + 1, n):
            gap = dist[i, j] - target[i, j]
            if gap < -eps_contact:
                raise OverlapError(i, j, dist[i, j], target[i, j])
            if abs(gap) <= eps_contact:
                adjacency[i, j] = adjacency[j, i] = 1
    return adjacency


def contact_count(adjacency: np.ndarray) -> int:
    return int(np.sum(adjacency) // 2)


def apply_pi(cluster: Cluster, op: "PIOperation") -> Cluster:
    """Act on a cluster with a permutation-inversion operation.

    The result has positions sign * x[perm] (sphere relabeling followed by an
    optional point reflection through the origin).  The permutation must map
    each sphere onto one of equal radius.
    """
    perm = np.asarray(op.perm, dtype=int)
    if perm.shape != (cluster.n_spheres,):
        raise ValueError("operation size does not match cluster")
    rad = cluster.radii
    if not np.array_equal(rad[perm], rad):
        raise RadiiMismatchError(
            "permutation does not preserve the radii of the cluster"
        )
    return Cluster(op.sign * cluster.positions[perm], rad)


@dataclass(frozen=True)
class Partition:
    """Partition of sphere indices 0..N-1 into classes.

    Stored as a label per index; labels are normalized to 0..k-1 in order of
    first appearance, so equal partitions compare equal.
    """

    labels: tuple[int, ...]

    def __post_init__(self):
        seen: dict[int, int] = {}
        norm = []
        for lab in self.labels:
            if lab not in seen:
                seen[lab] = len(seen)
            norm.append(seen[lab])
        object.__setattr__(self, "labels", tuple(norm))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        return cls(tuple(int(v) for v in labels))

    @classmethod
    def from_classes(cls, classes: Sequence[Sequence[int]], n: int) -> "Partition":
        labels = [-1] * n
        for k, cl in enumerate(classes):
            for i in cl:
                if not 0 <= i < n or labels[i] != -1:
                    raise ValueError("classes must be disjoint and cover 0..N-1")
                labels[i] = k
        if any(v == -1 for v in labels):
            raise ValueError("classes must cover every index")
        return cls(tuple(labels))

    @classmethod
    def from_radii(cls, radii: np.ndarray, tol: float = 1e-9) -> "Partition":
        """Group spheres by radius, within an absolute tolerance."""
        radii = np.asarray(radii, dtype=float)
        reps: list[float] = []
        labels = []
        for r in radii:
            for k, rep in enumerate(reps):
                if abs(r - rep) <= tol:
                    labels.append(k)
                    break
            else:
                reps.append(float(r))
                labels.append(len(reps) - 1)
        return cls(tuple(labels))

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls((0,) * n)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_classes(self) -> int:
        return len(set(self.labels))

    def classes(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_classes)]
        for i, lab in enumerate(self.labels):
            out[lab].append(i)
        return tuple(tuple(c) for c in out)

    def refines(self, other: "Partition") -> bool:
        """True when every class of self lies inside a class of other."""
        if self.n != other.n:
            return False
        rep = {}
        for i, lab in enumerate(self.labels):
            if lab in rep and other.labels[i] != rep[lab]:
                return False
            rep[lab] = other.labels[i]
        return True


class ConstraintSystem:
    """Equality/strict-inequality constraint system on R^dim.

    Equalities q_i(y) = 0 come with an analytic Jacobian; inequalities
    h_j(y) > 0 are strict.  Subclasses override the vectorized evaluators.
    """

    def __init__(
        self,
        dim: int,
        n_eq: int,
        n_ineq: int,
        eq: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        eq_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        ineq: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        includes_com: bool = False,
    ):
        self.dim = int(dim)
        self.n_eq = int(n_eq)
        self.n_ineq = int(n_ineq)
        self.includes_com = bool(includes_com)
        self._eq = eq
        self._eq_jac = eq_jac
        self._ineq = ineq

    def eq(self, y: np.ndarray) -> np.ndarray:
        if self._eq is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self._eq(y), dtype=float))

    def eq_jac(self, y: np.ndarray) -> np.ndarray:
        if self._eq_jac is None:
            return np.zeros((0, self.dim))
        return np.atleast_2d(np.asarray(self._eq_jac(y), dtype=float))

    def ineq(self, y: np.ndarray) -> np.ndarray:
        if self._ineq is None:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self._ineq(y), dtype=float))

    def is_feasible(self, y: np.ndarray, tol_q: float) -> bool:
        """Equalities within tol_q in max norm, inequalities strictly positive."""
        if self.n_eq and np.max(np.abs(self.eq(y))) > tol_q:
            return False
        if self.n_ineq and not np.all(self.ineq(y) > 0.0):
            return False
        return True


class ClusterConstraints(ConstraintSystem):
    """Constraint system of a contact graph on sphere coordinates.

    Variables are the flattened centers y in R^{3N}.  Each contact (i, j)
    contributes |y_i - y_j|^2 - (r_i + r_j)^2 = 0; each non-contact pair
    contributes the same expression as a strict inequality.  With fix_com,
    three linear equalities pin the unweighted center of mass at the origin.
    """

    def __init__(self, adjacency: np.ndarray, radii: np.ndarray, fix_com: bool = True):
        adjacency = np.asarray(adjacency)
        radii = np.asarray(radii, dtype=float)
        n = len(radii)
        if adjacency.shape != (n, n):
            raise ValueError("adjacency shape does not match radii")
        if np.any(adjacency != adjacency.T) or np.any(np.diag(adjacency) != 0):
            raise ValueError("adjacency must be symmetric with zero diagonal")
        iu, ju = np.triu_indices(n, k=1)
        on = adjacency[iu, ju] != 0
        self.n_spheres = n
        self.adjacency = adjacency.astype(np.int8)
        self.radii = radii
        self.fix_com = bool(fix_com)
        self.contacts = np.stack([iu[on], ju[on]], axis=1)
        self.noncontacts = np.stack([iu[~on], ju[~on]], axis=1)
        sums = radii[iu] + radii[ju]
        self._eq_targets = (sums[on]) ** 2
        self._ineq_targets = (sums[~on]) ** 2
        mc = len(self.contacts)
        super().__init__(
            dim=3 * n,
            n_eq=mc + (3 if fix_com else 0),
            n_ineq=len(self.noncontacts),
            includes_com=fix_com,
        )
        # flattened coordinate slots of each contact pair, for the Jacobian
        trip = np.arange(3)
        self._slots_i = (3 * self.contacts[:, 0])[:, None] + trip
        self._slots_j = (3 * self.contacts[:, 1])[:, None] + trip
        self._rows = np.repeat(np.arange(mc), 3).reshape(mc, 3)

    def eq(self, y: np.ndarray) -> np.ndarray:
        p = y.reshape(self.n_spheres, 3)
        d = p[self.contacts[:, 0]] - p[self.contacts[:, 1]]
        res = np.einsum("ij,ij->i", d, d) - self._eq_targets
        if self.fix_com:
            return np.concatenate([res, p.sum(axis=0)])
        return res

    def eq_jac(self, y: np.ndarray) -> np.ndarray:
        p = y.reshape(self.n_spheres, 3)
        d = p[self.contacts[:, 0]] - p[self.contacts[:, 1]]
        jac = np.zeros((self.n_eq, self.dim))
        jac[self._rows, self._slots_i] = 2.0 * d
        jac[self._rows, self._slots_j] = -2.0 * d
        if self.fix_com:
            mc = len(self.contacts)
            for k in range(3):
                jac[mc + k, k::3] = 1.0
        return jac

    def ineq(self, y: np.ndarray) -> np.ndarray:
        p = y.reshape(self.n_spheres, 3)
        d = p[self.noncontacts[:, 0]] - p[self.noncontacts[:, 1]]
        return np.einsum("ij,ij->i", d, d) - self._ineq_targets


def build_constraint_system(
    adjacency: np.ndarray, radii: np.ndarray, fix_com: bool = True
) -> ClusterConstraints:
    """Constraint system for a contact graph over spheres with given radii."""
    return ClusterConstraints(adjacency, radii, fix_com=fix_com)


# ---------------------------------------------------------------------------
# JSON interchange


def cluster_to_json(cluster: Cluster, colors: Optional[Sequence[int]] = None) -> dict:
    doc = {
        "positions": [[float(v) for v in row] for row in cluster.positions],
        "radii": [float(r) for r in cluster.radii],
    }
    if colors is not None:
        if len(colors) != cluster.n_spheres:
            raise ValueError("colors must have one entry per sphere")
        doc["colors"] = [int(c) for c in colors]
    return doc


def cluster_from_json(doc: dict) -> tuple[Cluster, Optional[list[int]]]:
    try:
        positions = np.asarray(doc["positions"], dtype=float)
        radii = np.asarray(doc["radii"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed cluster document: {exc}") from exc
    colors = doc.get("colors")
    if colors is not None:
        colors = [int(c) for c in colors]
        if len(colors) != len(radii):
            raise ValueError("colors must have one entry per sphere")
    return Cluster(positions, radii), colors


def save_cluster(path: str, cluster: Cluster, colors: Optional[Sequence[int]] = None):
    with open(path, "w") as fh:
        json.dump(cluster_to_json(cluster, colors), fh, indent=2)
        fh.write("\n")


def load_cluster(path: str) -> tuple[Cluster, Optional[list[int]]]:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("cluster file must contain a JSON object")
    return cluster_from_json(doc)
