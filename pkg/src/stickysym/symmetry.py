"""Sticky symmetry pipeline: which relabelings of a cluster are reachable.

For a cluster x with contact graph A, an operation g = (P, s) belongs to the
sticky group when the embedding g(x) can be reached from x by a continuous
motion that keeps every contact and never lets spheres cross.  The pipeline
over-approximates the group by the contact-graph automorphisms (times the
sign), pre-verifies the cheap members (rigid rotations of the embedding),
and settles every remaining candidate with a numerical path search.  Found
elements are closed under composition; the symmetry number is the order of
the resulting group and determines how many disconnected copies of the
configuration manifold a single labeled cluster stands for.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ColorRadiiConflictError, InfeasibleEndpointError
from .geometry import (
    Cluster,
    Partition,
    apply_pi,
    build_constraint_system,
    detect_contacts,
    EPS_CONTACT,
)
from .groups import (
    EPS_D,
    PIGroup,
    PIOperation,
    TAG_CLOSURE,
    TAG_PATH,
    TAG_ROTATION,
    automorphism_group,
    closure,
    counting_number,
    format_pi,
    parse_pi,
    pi_candidates,
    point_group,
    preserves_partition,
)
from .manifold import PathConfig, find_path, make_frame, tangent_basis

REPORT_VERSION = 1

STATUS_NOT_FOUND = "not-found"


def derived_seed(base_seed: int, *key: int) -> int:
    """Deterministic 63-bit child seed for a (run seed, index...) pair."""
    ss = np.random.SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


@dataclass(frozen=True)
class ElementRecord:
    """How one candidate operation was settled."""

    status: str               # rotation | path | closure | not-found
    n_generated: int = 0
    attempts: int = 0
    found_attempt: int = -1


@dataclass
class SymmetryReport:
    """Full result of a sticky-symmetry computation on one cluster."""

    cluster: Cluster
    adjacency: np.ndarray
    automorphisms: list[tuple[int, ...]]
    point_group: PIGroup
    sticky_group: PIGroup
    symmetry_number: int
    counting_number: int
    partition: Partition           # relabeling classes (radii, or colors)
    include_inversions: bool
    config: PathConfig
    seed: int
    manifold_dim: int
    path_searches_run: int
    closure_inferred_count: int
    element_records: dict[PIOperation, ElementRecord]
    colors: Optional[Partition] = None

    @property
    def n_spheres(self) -> int:
        return self.cluster.n_spheres


def _polish_onto_contacts(cs, x0: np.ndarray, tol_q: float) -> np.ndarray:
    """Refine a nominal embedding so contacts hold to solver precision."""
    if cs.is_feasible(x0, tol_q):
        return x0
    frame = make_frame(cs, x0)
    polished = None if frame is None else frame.newton_correct(cs, x0, tol_q, 50)
    if polished is None or (cs.n_ineq and not np.all(cs.ineq(polished) > 0)):
        raise InfeasibleEndpointError(
            "cluster does not satisfy its contact constraints to solver precision"
        )
    return polished


def _search_task(args):
    """Worker for one candidate element (safe to run in a subprocess)."""
    adjacency, radii, x0, x1, config, fix_com = args
    cs = build_constraint_system(adjacency, radii, fix_com=fix_com)
    res = find_path(cs, x0, x1, config)
    return res.found, res.n_generated, res.attempts, res.found_attempt


def sticky_symmetry_group(
    cluster: Cluster,
    config: Optional[PathConfig] = None,
    include_inversions: bool = True,
    eps_contact: float = EPS_CONTACT,
    eps_d: float = EPS_D,
    jobs: int = 1,
    mark_implied: bool = False,
    fix_com: bool = True,
) -> SymmetryReport:
    """Compute the sticky symmetry group of a cluster.

    Stages: detect contacts; enumerate contact-graph automorphisms
    (restricted to radius-preserving ones when radii differ); pre-verify
    rotations of the embedding; run one path search per remaining candidate
    in G x {+1, -1}; close the found set under composition.  Elements added
    only by that final closure are tagged 'closure' - a nonzero count means
    some search failed on a reachable target (a path-finder false negative).

    With mark_implied=True, candidates already implied by previously found
    elements are tagged 'closure' without being searched (cheaper, but the
    closure count loses its diagnostic meaning).  jobs > 1 runs the path
    searches in subprocesses; mark_implied is ignored in that case.

    Per-element path seeds derive from config.seed and the candidate's rank
    in canonical element order, so reruns and parallel runs agree.
    """
    config = config or PathConfig()
    work = cluster.centered()
    adjacency = detect_contacts(work, eps_contact)
    radii_classes = Partition.from_radii(work.radii)

    automorphisms = automorphism_group(adjacency)
    if radii_classes.n_classes > 1:
        automorphisms = [
            p for p in automorphisms if preserves_partition(p, radii_classes)
        ]

    cs = build_constraint_system(adjacency, work.radii, fix_com=fix_com)
    x0 = _polish_onto_contacts(cs, work.flat(), config.tol_q)
    work = Cluster(x0.reshape(-1, 3), work.radii)
    tangent_basis(cs, x0)  # raises RankDeficientError on dependent gradients
    manifold_dim = cs.dim - cs.n_eq

    full_point_group = point_group(work, automorphisms, eps_d)
    if include_inversions:
        seed_group = full_point_group
    else:
        seed_group = PIGroup.from_ops(
            {op: tag for op, tag in full_point_group.tagged().items() if op.sign == 1}
        )

    records: dict[PIOperation, ElementRecord] = {
        op: ElementRecord(TAG_ROTATION) for op in seed_group
    }
    all_ops = pi_candidates(automorphisms, include_inversions)
    candidates = [(i, op) for i, op in enumerate(all_ops) if op not in records]

    found: set[PIOperation] = set(seed_group)
    searched = 0

    def run_search(idx: int, op: PIOperation):
        x1 = apply_pi(work, op).flat()
        elem_config = replace(config, seed=derived_seed(config.seed, idx))
        return _search_task((adjacency, work.radii, x0, x1, elem_config, fix_com))

    if jobs > 1 and candidates:
        tasks = []
        for idx, op in candidates:
            x1 = apply_pi(work, op).flat()
            elem_config = replace(config, seed=derived_seed(config.seed, idx))
            tasks.append((adjacency, work.radii, x0, x1, elem_config, fix_com))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_search_task, tasks))
        for (idx, op), (ok, n_gen, attempts, found_at) in zip(candidates, outcomes):
            searched += 1
            status = TAG_PATH if ok else STATUS_NOT_FOUND
            records[op] = ElementRecord(status, n_gen, attempts, found_at)
            if ok:
                found.add(op)
    else:
        implied: set[PIOperation] = set()
        for idx, op in candidates:
            if mark_implied:
                if not implied:
                    implied = closure(found)
                if op in implied:
                    records[op] = ElementRecord(TAG_CLOSURE)
                    continue
            ok, n_gen, attempts, found_at = run_search(idx, op)
            searched += 1
            status = TAG_PATH if ok else STATUS_NOT_FOUND
            records[op] = ElementRecord(status, n_gen, attempts, found_at)
            if ok:
                found.add(op)
                implied = set()  # stale; recompute lazily

    sticky = closure(found)
    tagged: dict[PIOperation, str] = {}
    closure_inferred = 0
    for op in sticky:
        rec = records.get(op)
        if rec is not None and rec.status in (TAG_ROTATION, TAG_PATH, TAG_CLOSURE):
            tagged[op] = rec.status
            if rec.status == TAG_CLOSURE:
                closure_inferred += 1
        else:
            tagged[op] = TAG_CLOSURE
            closure_inferred += 1
            prev = records.get(op)
            records[op] = ElementRecord(
                TAG_CLOSURE,
                prev.n_generated if prev else 0,
                prev.attempts if prev else 0,
            )
    sticky_group_obj = PIGroup.from_ops(tagged).validate()

    sigma = sticky_group_obj.order
    n_copies = counting_number(
        sigma, work.n_spheres, radii_classes, include_inversions
    )

    return SymmetryReport(
        cluster=work,
        adjacency=adjacency,
        automorphisms=automorphisms,
        point_group=seed_group,
        sticky_group=sticky_group_obj,
        symmetry_number=sigma,
        counting_number=n_copies,
        partition=radii_classes,
        include_inversions=include_inversions,
        config=config,
        seed=config.seed,
        manifold_dim=manifold_dim,
        path_searches_run=searched,
        closure_inferred_count=closure_inferred,
        element_records=records,
    )


def radii_symmetry(
    cluster: Cluster,
    config: Optional[PathConfig] = None,
    **kwargs,
) -> SymmetryReport:
    """Sticky symmetry of a cluster with unequal radii.

    Identical to `sticky_symmetry_group`: the radii partition restricts the
    candidate permutations and enters the counting number.  Provided as a
    named entry point because, unlike coloring, changing radii changes the
    manifold itself, so the path searches must be re-run.
    """
    return sticky_symmetry_group(cluster, config, **kwargs)


def colored_symmetry(report: SymmetryReport, colors: Partition) -> SymmetryReport:
    """Restrict a computed report to color-preserving relabelings.

    Colors refine the relabeling classes without touching the geometry, so
    no new path searches are needed: the sticky group is intersected with
    the color-preserving permutations and the counting number is rebuilt
    from the color class sizes.  Colors must not merge spheres of different
    radii.
    """
    if colors.n != report.n_spheres:
        raise ValueError("color partition size does not match the cluster")
    radii_classes = Partition.from_radii(report.cluster.radii)
    if not colors.refines(radii_classes):
        raise ColorRadiiConflictError(
            "color classes must not mix spheres of different radii"
        )
    automorphisms = [
        p for p in report.automorphisms if preserves_partition(p, colors)
    ]
    point_restricted = report.point_group.restrict(colors)
    sticky_restricted = report.sticky_group.restrict(colors).validate()
    records = {
        op: rec
        for op, rec in report.element_records.items()
        if preserves_partition(op.perm, colors)
    }
    sigma = sticky_restricted.order
    n_copies = counting_number(
        sigma, report.n_spheres, colors, report.include_inversions
    )
    return SymmetryReport(
        cluster=report.cluster,
        adjacency=report.adjacency,
        automorphisms=automorphisms,
        point_group=point_restricted,
        sticky_group=sticky_restricted,
        symmetry_number=sigma,
        counting_number=n_copies,
        partition=colors,
        include_inversions=report.include_inversions,
        config=report.config,
        seed=report.seed,
        manifold_dim=report.manifold_dim,
        path_searches_run=0,
        closure_inferred_count=sticky_restricted.count_tag(TAG_CLOSURE),
        element_records=records,
        colors=colors,
    )


# ---------------------------------------------------------------------------
# JSON interchange


def report_to_json(report: SymmetryReport) -> dict:
    def group_strings(group: PIGroup) -> list[str]:
        return [format_pi(op) for op in group]

    status_map = {
        format_pi(op): rec.status for op, rec in report.element_records.items()
    }
    stats_map = {
        format_pi(op): {
            "n_generated": rec.n_generated,
            "attempts": rec.attempts,
            "found_attempt": rec.found_attempt,
        }
        for op, rec in report.element_records.items()
        if rec.n_generated or rec.attempts
    }
    return {
        "version": REPORT_VERSION,
        "n_spheres": report.n_spheres,
        "positions": report.cluster.positions.tolist(),
        "radii": report.cluster.radii.tolist(),
        "adjacency": report.adjacency.astype(int).tolist(),
        "manifold_dim": report.manifold_dim,
        "include_inversions": report.include_inversions,
        "partition": list(report.partition.labels),
        "colors": list(report.colors.labels) if report.colors else None,
        "automorphisms": [
            format_pi(PIOperation(p, 1)) for p in report.automorphisms
        ],
        "point_group": group_strings(report.point_group),
        "sticky_group": group_strings(report.sticky_group),
        "symmetry_number": report.symmetry_number,
        "counting_number": report.counting_number,
        "closure_inferred_count": report.closure_inferred_count,
        "path_searches_run": report.path_searches_run,
        "element_status": status_map,
        "element_stats": stats_map,
        "config": asdict(report.config),
        "seed": report.seed,
    }


def report_from_json(doc: dict) -> SymmetryReport:
    n = int(doc["n_spheres"])
    cluster = Cluster(np.asarray(doc["positions"]), np.asarray(doc["radii"]))
    adjacency = np.asarray(doc["adjacency"], dtype=np.int8)
    config = PathConfig(**doc["config"])
    status = {
        parse_pi(text, n): st for text, st in doc["element_status"].items()
    }
    stats = doc.get("element_stats", {})
    records = {}
    for op, st in status.items():
        extra = stats.get(format_pi(op), {})
        records[op] = ElementRecord(
            st,
            int(extra.get("n_generated", 0)),
            int(extra.get("attempts", 0)),
            int(extra.get("found_attempt", -1)),
        )
    def build_group(strings: list[str]) -> PIGroup:
        ops = [parse_pi(s, n) for s in strings]
        return PIGroup.from_ops(
            {op: status.get(op, TAG_ROTATION) for op in ops}
        )
    colors = doc.get("colors")
    return SymmetryReport(
        cluster=cluster,
        adjacency=adjacency,
        automorphisms=[parse_pi(s, n).perm for s in doc["automorphisms"]],
        point_group=build_group(doc["point_group"]),
        sticky_group=build_group(doc["sticky_group"]),
        symmetry_number=int(doc["symmetry_number"]),
        counting_number=int(doc["counting_number"]),
        partition=Partition.from_labels(doc["partition"]),
        include_inversions=bool(doc["include_inversions"]),
        config=config,
        seed=int(doc["seed"]),
        manifold_dim=int(doc["manifold_dim"]),
        path_searches_run=int(doc["path_searches_run"]),
        closure_inferred_count=int(doc["closure_inferred_count"]),
        element_records=records,
        colors=Partition.from_labels(colors) if colors else None,
    )


def save_report(path: str, report: SymmetryReport):
    with open(path, "w") as fh:
        json.dump(report_to_json(report), fh, indent=2)
        fh.write("\n")


def load_report(path: str) -> SymmetryReport:
    with open(path) as fh:
        return report_from_json(json.load(fh))
