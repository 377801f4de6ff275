"""Permutation-inversion operations and the groups built from them.

An operation g = (P, s) combines a relabeling permutation P of the spheres
with a sign s = +-1; it acts on an embedding x as s * x[perm].  The
operations relevant to a cluster form three nested groups:

  point group  <=  sticky group  <=  automorphisms x {+1, -1}

The automorphism group depends only on the contact graph; the point group
contains the operations realizable as a rigid rotation of the embedding; the
sticky group (computed in `stickysym.symmetry`) contains those realizable by
a continuous contact-preserving deformation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import NotAGroupError, NotDivisibleError, TooLargeError
from .geometry import Cluster, Partition, apply_pi, distance_matrix

# Tolerance on squared-distance-matrix invariance and on the Procrustes RMS
# residual when testing whether an operation is a rotation of the embedding.
EPS_D = 1e-6

# How each group element was established.
TAG_ROTATION = "rotation"   # verified as a rigid rotation of the embedding
TAG_PATH = "path"           # verified by an explicit path on the manifold
TAG_CLOSURE = "closure"     # inferred from group closure, not directly verified

# Exhaustive graph searches are limited to this many vertices.
MAX_EXHAUSTIVE_N = 16


@dataclass(frozen=True)
class PIOperation:
    """Permutation-inversion operation (relabeling plus optional reflection).

    perm is stored in image form: label i is sent to perm[i], and the action
    on coordinates gathers positions, y = sign * x[perm].  Composition
    follows the matrix convention: (g * h) applies h first, then g.
    """

    perm: tuple[int, ...]
    sign: int = 1

    def __post_init__(self):
        perm = tuple(int(v) for v in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"not a permutation of 0..{len(perm) - 1}: {perm}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "sign", int(self.sign))

    @classmethod
    def identity(cls, n: int, sign: int = 1) -> "PIOperation":
        return cls(tuple(range(n)), sign)

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def is_identity(self) -> bool:
        return self.sign == 1 and self.perm == tuple(range(self.n))

    def __mul__(self, other: "PIOperation") -> "PIOperation":
        if self.n != other.n:
            raise ValueError("cannot compose operations of different sizes")
        perm = tuple(other.perm[i] for i in self.perm)
        return PIOperation(perm, self.sign * other.sign)

    def inverse(self) -> "PIOperation":
        inv = [0] * self.n
        for i, j in enumerate(self.perm):
            inv[j] = i
        return PIOperation(tuple(inv), self.sign)

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycle decomposition (0-based), fixed points omitted."""
        seen = [False] * self.n
        out = []
        for start in range(self.n):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.perm[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.perm[j]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        return format_pi(self)

    def sort_key(self):
        return (self.perm, 0 if self.sign == 1 else 1)


def format_pi(op: PIOperation) -> str:
    """Cycle-notation string, 1-based, with a trailing '*' for sign -1.

    Labels within a cycle are concatenated when all labels fit in one digit
    and space-separated otherwise, e.g. "(12)(34)*" or "(1 10 2)".
    """
    cycles = op.cycles()
    if not cycles:
        body = "E"
    else:
        wide = op.n > 9
        parts = []
        for cyc in cycles:
            labels = [str(v + 1) for v in cyc]
            parts.append("(" + (" ".join(labels) if wide else "".join(labels)) + ")")
        body = "".join(parts)
    return body + ("*" if op.sign == -1 else "")


def parse_pi(text: str, n: int) -> PIOperation:
    """Parse cycle notation produced by `format_pi` (round-trip inverse)."""
    s = text.strip()
    if not s:
        raise ValueError("empty operation string")
    sign = 1
    if s.endswith("*"):
        sign = -1
        s = s[:-1].strip()
    perm = list(range(n))
    if s in ("E", "e", "()", ""):
        return PIOperation(tuple(perm), sign)
    if s.count("(") != s.count(")"):
        raise ValueError(f"unbalanced parentheses in {text!r}")
    pos = 0
    found_any = False
    while pos < len(s):
        if s[pos].isspace():
            pos += 1
            continue
        if s[pos] != "(":
            raise ValueError(f"unexpected character {s[pos]!r} in {text!r}")
        end = s.index(")", pos)
        body = s[pos + 1 : end].strip()
        pos = end + 1
        if not body:
            continue
        if any(ch.isspace() or ch == "," for ch in body):
            labels = [int(tok) for tok in body.replace(",", " ").split()]
        else:
            if not body.isdigit():
                raise ValueError(f"bad cycle {body!r} in {text!r}")
            labels = [int(ch) for ch in body]
        if len(labels) < 2:
            continue
        zero = [v - 1 for v in labels]
        if any(not 0 <= v < n for v in zero) or len(set(zero)) != len(zero):
            raise ValueError(f"cycle {body!r} out of range or repeated for n={n}")
        for a, b in zip(zero, zero[1:] + zero[:1]):
            if perm[a] != a:
                raise ValueError(f"label {a + 1} appears in two cycles in {text!r}")
            perm[a] = b
        found_any = True
    if not found_any:
        raise ValueError(f"no cycles found in {text!r}")
    return PIOperation(tuple(perm), sign)


# ---------------------------------------------------------------------------
# Graph automorphisms


def _degree_profiles(A: np.ndarray) -> list[tuple]:
    deg = A.sum(axis=1)
    return [
        (int(deg[i]), tuple(sorted(int(deg[j]) for j in np.flatnonzero(A[i]))))
        for i in range(A.shape[0])
    ]


def isomorphism_maps(A: np.ndarray, B: np.ndarray):
    """Backtracking search for permutations p with A[p[i], p[j]] == B[i, j].

    Yields image-form permutation tuples.  Vertices of B are assigned in a
    most-constrained-first static order; candidates are pruned by degree and
    neighbor-degree profiles and checked against all previous assignments.
    """
    A = np.asarray(A, dtype=bool)
    B = np.asarray(B, dtype=bool)
    n = A.shape[0]
    if B.shape[0] != n:
        return
    if n > MAX_EXHAUSTIVE_N:
        raise TooLargeError(f"graph search limited to {MAX_EXHAUSTIVE_N} vertices")
    if int(A.sum()) != int(B.sum()):
        return
    prof_a = _degree_profiles(A)
    prof_b = _degree_profiles(B)
    if sorted(prof_a) != sorted(prof_b):
        return
    candidates = [
        [j for j in range(n) if prof_a[j] == prof_b[i]] for i in range(n)
    ]
    order = sorted(range(n), key=lambda i: len(candidates[i]))
    image = [-1] * n
    used = [False] * n

    def extend(k: int):
        if k == n:
            yield tuple(image)
            return
        i = order[k]
        for j in candidates[i]:
            if used[j]:
                continue
            ok = True
            for t in range(k):
                u = order[t]
                if B[i, u] != A[j, image[u]]:
                    ok = False
                    break
            if ok:
                image[i] = j
                used[j] = True
                yield from extend(k + 1)
                image[i] = -1
                used[j] = False

    yield from extend(0)


def automorphism_group(adjacency: np.ndarray) -> list[tuple[int, ...]]:
    """All permutations of vertex labels preserving the contact graph.

    Returns image-form tuples sorted lexicographically.  The result is
    verified to be closed under composition.
    """
    perms = sorted(isomorphism_maps(adjacency, adjacency))
    pset = set(perms)
    if tuple(range(len(adjacency))) not in pset:
        raise NotAGroupError("automorphism search lost the identity")
    for p in perms:
        for q in perms:
            if tuple(q[i] for i in p) not in pset:
                raise NotAGroupError("automorphism set is not closed")
    return perms


def preserves_partition(perm: Sequence[int], partition: Partition) -> bool:
    """True when the permutation maps every class of the partition onto itself."""
    labels = partition.labels
    return all(labels[j] == labels[i] for i, j in enumerate(perm))


# ---------------------------------------------------------------------------
# Group containers


def closure(ops: Iterable[PIOperation]) -> set[PIOperation]:
    """Smallest set containing ops closed under composition (hence a group)."""
    ops = list(ops)
    if not ops:
        return set()
    n = ops[0].n
    group = {PIOperation.identity(n)}
    group.update(ops)
    frontier = set(group)
    while frontier:
        new = set()
        for g in frontier:
            for h in group:
                for prod in (g * h, h * g):
                    if prod not in group and prod not in new:
                        new.add(prod)
        group.update(new)
        frontier = new
    return group


@dataclass(frozen=True)
class PIGroup:
    """Finite group of PIOperations with per-element origin tags."""

    elements: tuple[PIOperation, ...]
    tags: tuple[str, ...]

    @classmethod
    def from_ops(cls, tagged: dict[PIOperation, str]) -> "PIGroup":
        items = sorted(tagged.items(), key=lambda kv: kv[0].sort_key())
        return cls(tuple(op for op, _ in items), tuple(tag for _, tag in items))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, op: PIOperation) -> bool:
        return op in set(self.elements)

    def tag_of(self, op: PIOperation) -> str:
        return self.tags[self.elements.index(op)]

    def tagged(self) -> dict[PIOperation, str]:
        return dict(zip(self.elements, self.tags))

    def count_tag(self, tag: str) -> int:
        return sum(1 for t in self.tags if t == tag)

    def validate(self) -> "PIGroup":
        """Check the group axioms; raise NotAGroupError on failure."""
        if not self.elements:
            raise NotAGroupError("empty element set")
        n = self.elements[0].n
        eset = set(self.elements)
        if len(eset) != len(self.elements):
            raise NotAGroupError("repeated elements")
        if PIOperation.identity(n) not in eset:
            raise NotAGroupError("identity missing")
        for g in self.elements:
            if g.inverse() not in eset:
                raise NotAGroupError(f"inverse of {g} missing")
            for h in self.elements:
                if g * h not in eset:
                    raise NotAGroupError(f"product {g} * {h} escapes the set")
        return self

    def restrict(self, partition: Partition) -> "PIGroup":
        """Subgroup of elements whose permutation preserves every class."""
        kept = {
            op: tag
            for op, tag in zip(self.elements, self.tags)
            if preserves_partition(op.perm, partition)
        }
        return PIGroup.from_ops(kept)


def counting_number(
    sigma: int,
    n_spheres: int,
    partition: Optional[Partition] = None,
    include_inversions: bool = True,
) -> int:
    """Number of disconnected manifold copies a single cluster accounts for.

    Equals the order of the ambient group of allowed relabelings (all
    permutations preserving the partition, doubled when inversions are
    included) divided by the symmetry number.
    """
    if partition is None:
        ambient = factorial(n_spheres)
    else:
        if partition.n != n_spheres:
            raise ValueError("partition size does not match cluster")
        ambient = 1
        for cl in partition.classes():
            ambient *= factorial(len(cl))
    if include_inversions:
        ambient *= 2
    if sigma <= 0 or ambient % sigma != 0:
        raise NotDivisibleError(
            f"symmetry number {sigma} does not divide group order {ambient}"
        )
    return ambient // sigma


# ---------------------------------------------------------------------------
# Point group


def procrustes_fit(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, float]:
    """Best proper rotation R minimizing sum_i |Y_i - R X_i|^2.

    Returns (R, rms) where rms is the root-mean-square residual.  The
    determinant of R is constrained to +1, so reflections are never absorbed
    into the fit.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    H = X.T @ Y
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T))
    if d == 0:
        d = 1.0
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    resid = Y - X @ R.T
    rms = float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
    return R, rms


def point_group(
    cluster: Cluster,
    automorphisms: Sequence[tuple[int, ...]],
    eps_d: float = EPS_D,
) -> PIGroup:
    """Operations realizable as a rigid rotation of the embedding.

    A permutation qualifies only if it leaves the squared-distance matrix
    invariant; the sign is then settled by fitting a proper rotation mapping
    x onto sign * x[perm].  Both signs may qualify (planar or linear
    embeddings are achiral).
    """
    work = cluster.centered()
    X = work.positions
    D = distance_matrix(work)
    members: dict[PIOperation, str] = {}
    for perm in automorphisms:
        p = np.asarray(perm, dtype=int)
        if np.max(np.abs(D[np.ix_(p, p)] - D)) > eps_d:
            continue
        for sign in (1, -1):
            _, rms = procrustes_fit(X, sign * X[p])
            if rms <= eps_d:
                members[PIOperation(tuple(perm), sign)] = TAG_ROTATION
    group = PIGroup.from_ops(members)
    group.validate()
    return group


def pi_candidates(
    automorphisms: Sequence[tuple[int, ...]], include_inversions: bool = True
) -> list[PIOperation]:
    """Full candidate list G x {+1, -1} in canonical order."""
    signs = (1, -1) if include_inversions else (1,)
    ops = [
        PIOperation(tuple(p), s)
        for p, s in itertools.product(automorphisms, signs)
    ]
    return sorted(ops, key=PIOperation.sort_key)
