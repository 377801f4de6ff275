"""Canonical cluster embeddings and the 2D demo region.

Loops and chains are built from exact planar/collinear coordinates and then
nudged by a small deterministic tangent perturbation (re-projected onto the
contact manifold), because perfectly planar or collinear embeddings are
atypical points of their manifolds.  The two rigid six-sphere seeds are
returned exactly.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import ConstructionFailedError
from .geometry import (
    Cluster,
    ConstraintSystem,
    build_constraint_system,
    detect_contacts,
)
from .manifold import make_frame

# scale of the symmetry-breaking nudge applied to loop/chain embeddings
PERTURB_SCALE = 1e-3

_PERTURB_ENTROPY = 986512  # fixed; builders must be deterministic


def _perturb_onto_manifold(
    positions: np.ndarray,
    adjacency: np.ndarray,
    radii: np.ndarray,
    scale: float,
    spawn_key: tuple,
) -> Cluster:
    """Add tangent noise of the given scale and re-project onto the contacts."""
    cs = build_constraint_system(adjacency, radii, fix_com=False)
    flat = positions.reshape(-1)
    if scale > 0:
        rng = np.random.default_rng(
            np.random.SeedSequence(_PERTURB_ENTROPY, spawn_key=spawn_key)
        )
        frame = make_frame(cs, flat)
        if frame is None:
            raise ConstructionFailedError("degenerate gradients at the seed shape")
        v = frame.project_tangent(scale * rng.standard_normal(flat.size))
        corrected = frame.newton_correct(cs, flat + v, tol_q=1e-12, max_iters=50)
        if corrected is None:
            raise ConstructionFailedError("re-projection of the nudge diverged")
        flat = corrected
    cluster = Cluster(flat.reshape(-1, 3), radii).centered()
    if not np.array_equal(detect_contacts(cluster), adjacency):
        raise ConstructionFailedError("perturbation changed the contact set")
    return cluster


def _resolve_radii(n: int, radii: Optional[Sequence[float]]) -> np.ndarray:
    if radii is None:
        return np.full(n, 0.5)
    radii = np.asarray(radii, dtype=float)
    if radii.shape != (n,):
        raise ValueError(f"expected {n} radii, got shape {radii.shape}")
    return radii


def canonical_loop(
    n: int,
    radii: Optional[Sequence[float]] = None,
    perturb: float = PERTURB_SCALE,
) -> Cluster:
    """Cyclic cluster: sphere k touches spheres k-1 and k+1 (mod n).

    Requires n >= 3 and all adjacent radius sums equal (the seed shape is a
    regular polygon).  Default radii are 0.5 (unit contact distance).
    """
    if n < 3:
        raise ValueError("a loop needs at least 3 spheres")
    rad = _resolve_radii(n, radii)
    sums = rad + np.roll(rad, -1)
    side = float(sums[0])
    if not np.allclose(sums, side, rtol=0, atol=1e-12):
        raise ConstructionFailedError(
            "loop seed needs equal adjacent radius sums (regular polygon)"
        )
    circum = side / (2.0 * np.sin(np.pi / n))
    ang = 2.0 * np.pi * np.arange(n) / n
    positions = np.stack(
        [circum * np.cos(ang), circum * np.sin(ang), np.zeros(n)], axis=1
    )
    adjacency = np.zeros((n, n), dtype=np.int8)
    for k in range(n):
        adjacency[k, (k + 1) % n] = adjacency[(k + 1) % n, k] = 1
    return _perturb_onto_manifold(positions, adjacency, rad, perturb, (1, n))


def canonical_chain(
    n: int,
    radii: Optional[Sequence[float]] = None,
    perturb: float = PERTURB_SCALE,
) -> Cluster:
    """Open chain: sphere k touches sphere k+1, nothing else."""
    if n < 2:
        raise ValueError("a chain needs at least 2 spheres")
    rad = _resolve_radii(n, radii)
    xs = np.concatenate([[0.0], np.cumsum(rad[:-1] + rad[1:])])
    positions = np.stack([xs, np.zeros(n), np.zeros(n)], axis=1)
    adjacency = np.zeros((n, n), dtype=np.int8)
    for k in range(n - 1):
        adjacency[k, k + 1] = adjacency[k + 1, k] = 1
    return _perturb_onto_manifold(positions, adjacency, rad, perturb, (2, n))


def octahedron() -> Cluster:
    """Rigid six-sphere cluster with 12 contacts: octahedral vertex packing."""
    a = 1.0 / np.sqrt(2.0)
    positions = np.array(
        [
            [a, 0.0, 0.0],
            [-a, 0.0, 0.0],
            [0.0, a, 0.0],
            [0.0, -a, 0.0],
            [0.0, 0.0, a],
            [0.0, 0.0, -a],
        ]
    )
    return Cluster(positions, np.full(6, 0.5)).centered()


def _apex(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, avoid: Optional[np.ndarray]
) -> np.ndarray:
    """Point at unit distance from a, b, c (equilateral base, side 1).

    Two mirror solutions exist; pick the one away from `avoid`, or the one
    on the +normal side when there is nothing to avoid.
    """
    centroid = (a + b + c) / 3.0
    normal = np.cross(b - a, c - a)
    normal = normal / np.linalg.norm(normal)
    height = np.sqrt(2.0 / 3.0)
    cand = [centroid + height * normal, centroid - height * normal]
    if avoid is None:
        return cand[0]
    return max(cand, key=lambda p: np.linalg.norm(p - avoid))


def polytetrahedron() -> Cluster:
    """Rigid six-sphere cluster with 12 contacts: three stacked tetrahedra.

    Built by sequential triangulation: a base triangle plus three apexes,
    each touching the three preceding spheres and avoiding the overlap
    branch.
    """
    p = [
        np.array([0.0, 0.0, 0.0]),
        np.array([1.0, 0.0, 0.0]),
        np.array([0.5, np.sqrt(3.0) / 2.0, 0.0]),
    ]
    p.append(_apex(p[0], p[1], p[2], avoid=None))
    p.append(_apex(p[1], p[2], p[3], avoid=p[0]))
    p.append(_apex(p[2], p[3], p[4], avoid=p[1]))
    cluster = Cluster(np.asarray(p), np.full(6, 0.5)).centered()
    if int(detect_contacts(cluster).sum()) // 2 != 12:
        raise ConstructionFailedError("triangulated packing lost a contact")
    return cluster


def toy_region() -> ConstraintSystem:
    """2D demo region: a valley between side walls, roofed by a parabola.

    D = { (x, y) : |x| < 3,  0 < y < x^2 + 5 }.  There are no equality
    constraints, so paths live in the full plane; the roof dips to height 5
    in the middle, forcing paths between the upper corners to descend
    through the pocket.
    """

    def ineq(p: np.ndarray) -> np.ndarray:
        x, y = p
        return np.array([3.0 - x, 3.0 + x, y, x * x + 5.0 - y])

    return ConstraintSystem(dim=2, n_eq=0, n_ineq=4, ineq=ineq)


def toy_region_endpoints() -> tuple[np.ndarray, np.ndarray]:
    """The standard demo endpoints: the two upper corners of the valley."""
    return np.array([-2.9, 12.5]), np.array([2.9, 12.5])


BUILTIN_NAMES = ("loop:N", "chain:N", "octahedron", "polytetrahedron", "toy2d")


def builtin_cluster(name: str) -> Cluster:
    """Resolve CLI builtin names: loop:N, chain:N, octahedron, polytetrahedron."""
    if name.startswith("loop:"):
        return canonical_loop(int(name.split(":", 1)[1]))
    if name.startswith("chain:"):
        return canonical_chain(int(name.split(":", 1)[1]))
    if name == "octahedron":
        return octahedron()
    if name == "polytetrahedron":
        return polytetrahedron()
    raise ValueError(
        f"unknown builtin {name!r}; expected one of {', '.join(BUILTIN_NAMES)}"
    )
