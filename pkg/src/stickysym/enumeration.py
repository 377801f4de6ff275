"""Exhaustive survey of six-sphere clusters obtained by breaking contacts.

Every flexible six-sphere cluster with m >= 5 contacts arises by deleting
bonds from one of the two rigid 12-contact packings and letting the cluster
relax off the deleted contacts.  The survey enumerates the connected,
pairwise non-isomorphic contact graphs obtained by deleting up to max_d
bonds, builds one representative embedding per graph, and runs the sticky
symmetry pipeline on each.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .builders import octahedron, polytetrahedron
from .errors import RelaxationFailedError
from .geometry import Cluster, build_constraint_system, detect_contacts
from .groups import isomorphism_maps
from .manifold import PathConfig, make_frame
from .symmetry import (
    SymmetryReport,
    derived_seed,
    format_pi,
    report_from_json,
    report_to_json,
    sticky_symmetry_group,
)

SURVEY_VERSION = 1

# required clearance (in center-distance units) between a representative
# embedding and every deleted contact
EPS_GAP = 1e-3


def is_connected(adjacency: np.ndarray) -> bool:
    """Breadth-first connectivity of the contact graph."""
    A = np.asarray(adjacency)
    n = A.shape[0]
    if n == 0:
        return False
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in np.flatnonzero(A[v]):
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return bool(seen.all())


def graphs_isomorphic(A: np.ndarray, B: np.ndarray) -> Optional[tuple[int, ...]]:
    """Witness permutation p with A[p[i], p[j]] == B[i, j], or None."""
    for p in isomorphism_maps(A, B):
        return p
    return None


@lru_cache(maxsize=8)
def _canon_tables(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    iu, ju = np.triu_indices(n, k=1)
    powers = 1 << np.arange(len(iu), dtype=np.int64)
    return perms[:, iu], perms[:, ju], powers


def canonical_form(adjacency: np.ndarray) -> int:
    """Relabeling-invariant integer key for a graph (minimum packed bits)."""
    A = np.asarray(adjacency, dtype=np.int64)
    rows, cols, powers = _canon_tables(A.shape[0])
    return int((A[rows, cols] @ powers).min())


def relax_off_boundary(
    cluster: Cluster,
    adjacency: np.ndarray,
    eps_gap: float = EPS_GAP,
    step: float = 5e-3,
    max_iters: int = 500,
) -> Cluster:
    """Move an embedding off deleted contacts into the manifold interior.

    The input satisfies every contact of `adjacency` but may have
    non-contact pairs sitting exactly at the contact distance (bonds just
    deleted).  Projected gradient ascent on the squared lengths of the
    offending pairs opens them up while the remaining contacts are held by
    re-projection.  The ascent direction is equivariant under any symmetry
    of the embedding that preserves the graph, so a symmetric seed keeps
    its point symmetry.
    """
    cs = build_constraint_system(adjacency, cluster.radii, fix_com=False)
    if cs.n_ineq == 0:
        return cluster
    y = cluster.flat()
    n = cluster.n_spheres
    pairs = cs.noncontacts
    targets = cluster.radii[pairs[:, 0]] + cluster.radii[pairs[:, 1]]

    def clearances(vec: np.ndarray) -> np.ndarray:
        p = vec.reshape(n, 3)
        d = p[pairs[:, 0]] - p[pairs[:, 1]]
        return np.sqrt(np.einsum("ij,ij->i", d, d)) - targets

    clear = clearances(y)
    if np.any(clear < -1e-9):
        raise RelaxationFailedError("embedding has overlapping spheres")
    current_step = step
    for _ in range(max_iters):
        if clear.min() >= eps_gap:
            return Cluster(y.reshape(n, 3), cluster.radii).centered()
        active = clear < eps_gap
        p = y.reshape(n, 3)
        grad = np.zeros_like(p)
        for i, j in pairs[active]:
            d = p[i] - p[j]
            grad[i] += 2.0 * d
            grad[j] -= 2.0 * d
        frame = make_frame(cs, y)
        if frame is None:
            raise RelaxationFailedError("degenerate contact gradients")
        v = frame.project_tangent(grad.reshape(-1))
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise RelaxationFailedError(
                "no tangent direction opens the deleted contacts"
            )
        z = y + (current_step / norm) * v
        w = frame.newton_correct(cs, z, tol_q=1e-12, max_iters=50)
        if w is not None:
            new_clear = clearances(w)
            if new_clear.min() > clear.min() and np.all(new_clear > -1e-9):
                y, clear = w, new_clear
                current_step = min(step, current_step * 2.0)
                continue
        current_step *= 0.5
        if current_step < 1e-7:
            raise RelaxationFailedError("ascent stalled before reaching clearance")
    raise RelaxationFailedError(f"no interior point after {max_iters} iterations")


# ---------------------------------------------------------------------------
# Survey

SEED_BUILDERS = (("octahedron", octahedron), ("polytetrahedron", polytetrahedron))


@dataclass
class SurveyEntry:
    """One connected non-isomorphic contact graph and its analysis."""

    index: int
    d: int                      # number of deleted bonds
    canon: int
    source: str                 # which rigid seed produced the representative
    broken: tuple[tuple[int, int], ...]
    adjacency: np.ndarray
    representative: Cluster
    report: SymmetryReport

    @property
    def sigma(self) -> int:
        return self.report.symmetry_number

    @property
    def counting(self) -> int:
        return self.report.counting_number


@dataclass
class SurveyResult:
    entries: list[SurveyEntry]
    seed: int
    max_d: int
    config: PathConfig

    def counts_per_d(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for e in self.entries:
            out[e.d] = out.get(e.d, 0) + 1
        return dict(sorted(out.items()))

    def sigma_values(self, d: int) -> list[int]:
        return sorted(e.sigma for e in self.entries if e.d == d)

    def counting_values(self, d: int) -> list[int]:
        return sorted(e.counting for e in self.entries if e.d == d)

    def entry_with(self, d: int, aut_order: int) -> list[SurveyEntry]:
        return [
            e for e in self.entries
            if e.d == d and len(e.report.automorphisms) == aut_order
        ]


def enumerate_graphs(max_d: int = 7) -> list[dict]:
    """Connected, non-isomorphic contact graphs from the two rigid seeds.

    Returns one record per graph: the adjacency, the deleted-bond count d,
    the canonical key, and the seed embedding plus deleted bonds that first
    produced it.  Deterministic: seeds in fixed order, deletions in
    lexicographic order, output sorted by (d, canonical key).
    """
    records: dict[int, dict] = {}
    for source, build in SEED_BUILDERS:
        seed_cluster = build()
        A0 = detect_contacts(seed_cluster)
        iu, ju = np.triu_indices(6, k=1)
        bonds = [(int(i), int(j)) for i, j in zip(iu, ju) if A0[i, j]]
        assert len(bonds) == 12
        for d in range(0, max_d + 1):
            for combo in itertools.combinations(bonds, d):
                A = A0.copy()
                for i, j in combo:
                    A[i, j] = A[j, i] = 0
                if not is_connected(A):
                    continue
                key = canonical_form(A)
                if key in records:
                    continue
                records[key] = {
                    "adjacency": A,
                    "d": d,
                    "canon": key,
                    "source": source,
                    "broken": combo,
                    "seed_cluster": seed_cluster,
                }
    out = sorted(records.values(), key=lambda r: (r["d"], r["canon"]))
    for idx, rec in enumerate(out):
        rec["index"] = idx
    return out


def _survey_entry_task(args) -> dict:
    """Relax and analyse one survey graph (subprocess-safe)."""
    (index, d, canon, source, broken, adjacency, positions, radii,
     config, entry_seed, eps_gap, mark_implied) = args
    seed_cluster = Cluster(positions, radii)
    rep = relax_off_boundary(seed_cluster, adjacency, eps_gap=eps_gap)
    report = sticky_symmetry_group(
        rep, replace(config, seed=entry_seed), mark_implied=mark_implied
    )
    return {
        "index": index,
        "d": d,
        "canon": canon,
        "source": source,
        "broken": broken,
        "adjacency": adjacency,
        "representative": rep,
        "report": report,
    }


def survey(
    config: Optional[PathConfig] = None,
    max_d: int = 7,
    seed: int = 0,
    jobs: int = 1,
    eps_gap: float = EPS_GAP,
    mark_implied: bool = True,
) -> SurveyResult:
    """Run the sticky symmetry pipeline over every enumerated graph.

    Per-entry path seeds derive from `seed` and the entry index, so the
    result does not depend on execution order; jobs > 1 distributes entries
    over subprocesses (heavier graphs, by automorphism count, first).

    mark_implied skips searches for candidates already generated by found
    elements.  The group comes out the same either way; surveys keep it on
    because confirming absences, not finding paths, dominates the runtime.
    """
    config = config or PathConfig(n_max=20_000, retries=2)
    graphs = enumerate_graphs(max_d)
    tasks = []
    for rec in graphs:
        tasks.append((
            rec["index"], rec["d"], rec["canon"], rec["source"], rec["broken"],
            rec["adjacency"], rec["seed_cluster"].positions,
            rec["seed_cluster"].radii, config,
            derived_seed(seed, rec["index"]), eps_gap, mark_implied,
        ))
    if jobs > 1:
        # schedule big automorphism groups first: their searches dominate
        order = sorted(
            range(len(tasks)),
            key=lambda k: -len(list(isomorphism_maps(tasks[k][5], tasks[k][5]))),
        )
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = list(pool.map(_survey_entry_task, [tasks[k] for k in order]))
        results = sorted(done, key=lambda r: r["index"])
    else:
        results = [_survey_entry_task(t) for t in tasks]
    entries = [SurveyEntry(**r) for r in results]
    return SurveyResult(entries=entries, seed=seed, max_d=max_d, config=config)


# ---------------------------------------------------------------------------
# Serialization


def survey_to_json(result: SurveyResult) -> dict:
    sigma_per_d = {
        str(d): result.sigma_values(d) for d in result.counts_per_d()
    }
    return {
        "version": SURVEY_VERSION,
        "seed": result.seed,
        "max_d": result.max_d,
        "config": report_to_json(result.entries[0].report)["config"]
        if result.entries else None,
        "counts_per_d": {str(d): c for d, c in result.counts_per_d().items()},
        "sigma_per_d": sigma_per_d,
        "entries": [
            {
                "index": e.index,
                "d": e.d,
                "canon": e.canon,
                "source": e.source,
                "broken": [list(b) for b in e.broken],
                "adjacency": e.adjacency.astype(int).tolist(),
                "sigma": e.sigma,
                "counting": e.counting,
                "aut_order": len(e.report.automorphisms),
                "point_order": e.report.point_group.order,
                "closure_inferred": e.report.closure_inferred_count,
                "sticky_group": [format_pi(op) for op in e.report.sticky_group],
                "report": report_to_json(e.report),
            }
            for e in result.entries
        ],
    }


def survey_from_json(doc: dict) -> SurveyResult:
    entries = []
    for rec in doc["entries"]:
        report = report_from_json(rec["report"])
        entries.append(SurveyEntry(
            index=int(rec["index"]),
            d=int(rec["d"]),
            canon=int(rec["canon"]),
            source=rec["source"],
            broken=tuple((int(a), int(b)) for a, b in rec["broken"]),
            adjacency=np.asarray(rec["adjacency"], dtype=np.int8),
            representative=report.cluster,
            report=report,
        ))
    config = entries[0].report.config if entries else PathConfig()
    return SurveyResult(
        entries=entries,
        seed=int(doc["seed"]),
        max_d=int(doc["max_d"]),
        config=config,
    )


def save_survey(path: str, result: SurveyResult):
    with open(path, "w") as fh:
        json.dump(survey_to_json(result), fh)
        fh.write("\n")


def load_survey(path: str) -> SurveyResult:
    with open(path) as fh:
        return survey_from_json(json.load(fh))


def write_survey_csv(path: str, result: SurveyResult):
    """Per-entry table: one row per cluster, mirroring the survey summary."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "index", "d", "source", "sigma", "counting",
            "aut_order", "point_order", "closure_inferred", "broken_bonds",
        ])
        for e in result.entries:
            writer.writerow([
                e.index, e.d, e.source, e.sigma, e.counting,
                len(e.report.automorphisms), e.report.point_group.order,
                e.report.closure_inferred_count,
                ";".join(f"{i}-{j}" for i, j in e.broken),
            ])
