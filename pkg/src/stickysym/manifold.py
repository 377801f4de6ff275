"""Path finding on implicitly defined constraint manifolds.

The central routine `find_path` tries to connect two feasible configurations
of a constraint system by a discrete path that stays on the equality
manifold and strictly inside the inequalities.  It alternates steepest
descent of U(y) = |y - target|^2 with bursts of random tangent steps that
kick the walker away from inequality boundaries and out of local minima.

All steps share the same primitive: move in the tangent space at the
current point, then correct back onto the manifold with a quasi-Newton
solve along the constraint gradients of the starting point (the Gram matrix
of the gradients is factorized once per point and reused).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    InfeasibleEndpointError,
    NewtonDivergedError,
    RankDeficientError,
)
from .geometry import ConstraintSystem

# Singular values of the equality Jacobian below this are treated as rank
# deficiency of the constraint gradients.
RANK_TOL = 1e-8

# A reverse projection must land within this distance of the original point
# for a sampling proposal to count as reversible (branch check).
REVERSE_MATCH_TOL = 1e-6

MODES = ("gaussian", "sample")


@dataclass(frozen=True)
class PathConfig:
    """Parameters of the path search.

    tol doubles as the descent step bound and the arrival radius; sigma is
    the scale of random tangent steps; beta biases the sampling mode
    (negative values push the walker away from the target, which helps it
    slide around obstacles).  n_random steps are taken after each switch
    away from descent, and a search gives up after n_max generated points;
    retries restarts it with a fresh derived seed.
    """

    tol: float = 0.1
    sigma: float = 0.1
    beta: float = -0.1
    n_random: int = 20
    n_max: int = 100_000
    tol_stall: float = 1e-3
    tol_q: float = 1e-10
    newton_max_iters: int = 20
    mode: str = "gaussian"
    retries: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0 or self.sigma <= 0 or self.tol_q <= 0:
            raise ValueError("tol, sigma and tol_q must be positive")
        if self.n_random < 1 or self.n_max < 1 or self.retries < 1:
            raise ValueError("n_random, n_max and retries must be >= 1")
        if self.newton_max_iters < 1:
            raise ValueError("newton_max_iters must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


class Frame:
    """Tangent/normal decomposition at a fixed base point.

    Holds the equality Jacobian J and a Cholesky factorization of the Gram
    matrix J J^T.  Both the tangent projector and the quasi-Newton manifold
    correction reuse the single factorization.
    """

    __slots__ = ("J", "_cho", "m")

    def __init__(self, J: np.ndarray):
        self.J = J
        self.m = J.shape[0]
        if self.m:
            gram = J @ J.T
            self._cho = cho_factor(gram, lower=True, check_finite=False)
        else:
            self._cho = None

    def project_tangent(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of v onto the kernel of J."""
        if not self.m:
            return v.copy()
        coeff = cho_solve(self._cho, self.J @ v, check_finite=False)
        return v - self.J.T @ coeff

    def newton_correct(
        self,
        cs: ConstraintSystem,
        z: np.ndarray,
        tol_q: float,
        max_iters: int,
    ) -> Optional[np.ndarray]:
        """Solve q(z + J^T a) = 0 for a, starting from a = 0.

        Returns the corrected point, or None when the iteration does not
        reach tol_q within max_iters (projection failure).
        """
        if not self.m:
            return z.copy()
        a = np.zeros(self.m)
        w = z.copy()
        for _ in range(max_iters):
            res = cs.eq(w)
            if not np.all(np.isfinite(res)):
                return None
            if np.max(np.abs(res)) <= tol_q:
                return w
            a -= cho_solve(self._cho, res, check_finite=False)
            w = z + self.J.T @ a
        res = cs.eq(w)
        if np.all(np.isfinite(res)) and np.max(np.abs(res)) <= tol_q:
            return w
        return None


def make_frame(cs: ConstraintSystem, y: np.ndarray) -> Optional[Frame]:
    """Frame at y, or None when the Gram matrix is numerically singular."""
    J = cs.eq_jac(y)
    if not np.all(np.isfinite(J)):
        return None
    try:
        return Frame(J)
    except LinAlgError:
        return None


def tangent_basis(
    cs: ConstraintSystem, y: np.ndarray, rank_tol: float = RANK_TOL
) -> np.ndarray:
    """Orthonormal basis of the tangent space at y, shape (dim, dim - m).

    Computed from a full SVD of the equality Jacobian.  Raises
    RankDeficientError when the constraint gradients are linearly dependent
    at y, i.e. the manifold assumption fails there.
    """
    J = cs.eq_jac(y)
    m = J.shape[0]
    if m == 0:
        return np.eye(cs.dim)
    _, svals, Vt = np.linalg.svd(J, full_matrices=True)
    if m > cs.dim or svals.min() <= rank_tol:
        raise RankDeficientError(
            f"equality gradients have rank < {m} at the given point"
        )
    return Vt[m:].T.copy()


def project_to_manifold(
    cs: ConstraintSystem,
    y_base: np.ndarray,
    z: np.ndarray,
    tol_q: float = 1e-10,
    max_iters: int = 20,
) -> np.ndarray:
    """Correct z back onto the equality manifold along the gradients at y_base.

    Returns the corrected point z + w with w in the row span of the Jacobian
    at y_base.  Raises NewtonDivergedError when the iteration fails.
    """
    frame = make_frame(cs, y_base)
    if frame is None:
        raise RankDeficientError("Gram matrix of constraint gradients is singular")
    w = frame.newton_correct(cs, z, tol_q, max_iters)
    if w is None:
        raise NewtonDivergedError(
            f"projection did not reach tol_q={tol_q} in {max_iters} iterations"
        )
    return w


@dataclass(frozen=True)
class StepResult:
    """Outcome of one attempted step.

    point is the new configuration when accepted; on rejection it may carry
    the discarded candidate (for diagnostics) with `trigger`/`reason` set.
    """

    point: Optional[np.ndarray]
    trigger: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.trigger is None


def descent_step(
    cs: ConstraintSystem,
    y: np.ndarray,
    target: np.ndarray,
    config: PathConfig,
    frame: Optional[Frame] = None,
) -> StepResult:
    """One steepest-descent step of U(y) = |y - target|^2 along the manifold.

    The step moves min(tol, |P (target - y)|) along the normalized tangent
    projection of (target - y), then corrects onto the manifold.  Triggers:

      'stall'       projected direction shorter than tol_stall  (switch c)
      'projection'  manifold correction failed                  (switch b)
      'boundary'    corrected point violates an inequality      (switch a)
    """
    if frame is None:
        frame = make_frame(cs, y)
        if frame is None:
            return StepResult(None, "projection")
    v = frame.project_tangent(target - y)
    norm = float(np.linalg.norm(v))
    if norm < config.tol_stall:
        return StepResult(None, "stall")
    z = y + (min(config.tol, norm) / norm) * v
    w = frame.newton_correct(cs, z, config.tol_q, config.newton_max_iters)
    if w is None:
        return StepResult(None, "projection")
    if cs.n_ineq and not np.all(cs.ineq(w) > 0.0):
        return StepResult(w, "boundary")
    return StepResult(w)


def random_gaussian_step(
    cs: ConstraintSystem,
    y: np.ndarray,
    config: PathConfig,
    rng: np.random.Generator,
    frame: Optional[Frame] = None,
) -> StepResult:
    """Isotropic Gaussian tangent step of scale sigma, projected back.

    The proposal is rejected ('projection' / 'boundary') when the manifold
    correction fails or the corrected point leaves the feasible region.
    """
    if frame is None:
        frame = make_frame(cs, y)
        if frame is None:
            return StepResult(None, "projection")
    v = frame.project_tangent(config.sigma * rng.standard_normal(cs.dim))
    w = frame.newton_correct(cs, y + v, config.tol_q, config.newton_max_iters)
    if w is None:
        return StepResult(None, "projection")
    if cs.n_ineq and not np.all(cs.ineq(w) > 0.0):
        return StepResult(w, "boundary")
    return StepResult(w)


def metropolis_step(
    cs: ConstraintSystem,
    y: np.ndarray,
    target: np.ndarray,
    config: PathConfig,
    rng: np.random.Generator,
    frame: Optional[Frame] = None,
) -> StepResult:
    """Metropolis move for the density exp(-beta |y - target|^2) on the manifold.

    A Gaussian tangent proposal is projected onto the manifold, checked
    against the inequalities, and then checked for reversibility: the move
    back from the proposal must project onto the original point.  Surviving
    proposals are accepted with probability min(1, exp(-beta dU)).

    Note this uses the plain energy ratio; the proposal-density correction
    of an exactly balanced manifold sampler is omitted on purpose, the
    routine is a search heuristic first.
    """
    if frame is None:
        frame = make_frame(cs, y)
        if frame is None:
            return StepResult(None, "projection")
    v = frame.project_tangent(config.sigma * rng.standard_normal(cs.dim))
    w = frame.newton_correct(cs, y + v, config.tol_q, config.newton_max_iters)
    if w is None:
        return StepResult(None, "projection")
    if cs.n_ineq and not np.all(cs.ineq(w) > 0.0):
        return StepResult(w, "boundary")
    if frame.m:
        back = make_frame(cs, w)
        if back is None:
            return StepResult(w, "reverse")
        v_back = back.project_tangent(y - w)
        y_back = back.newton_correct(
            cs, w + v_back, config.tol_q, config.newton_max_iters
        )
        if y_back is None or np.linalg.norm(y_back - y) > REVERSE_MATCH_TOL:
            return StepResult(w, "reverse")
    du = float(np.sum((w - target) ** 2) - np.sum((y - target) ** 2))
    log_ratio = -config.beta * du
    if log_ratio < 0 and np.log(rng.uniform()) >= log_ratio:
        return StepResult(w, "metropolis")
    return StepResult(w)


@dataclass
class PathResult:
    """Outcome and statistics of a path search."""

    found: bool
    points: Optional[np.ndarray]  # accepted path of the successful attempt
    n_generated: int = 0          # all candidates over all attempts
    n_descent: int = 0
    n_random: int = 0             # accepted random steps
    n_boundary: int = 0
    n_projection: int = 0
    n_reverse: int = 0
    n_metropolis: int = 0
    n_stalls: int = 0
    attempts: int = 0
    found_attempt: int = -1
    max_step: float = 0.0
    seed: int = 0
    trace: Optional[list[tuple[str, np.ndarray]]] = None

    @property
    def n_points(self) -> int:
        return 0 if self.points is None else len(self.points)


def _attempt_path(
    cs: ConstraintSystem,
    x0: np.ndarray,
    x1: np.ndarray,
    config: PathConfig,
    rng: np.random.Generator,
    result: PathResult,
    trace: Optional[list],
) -> tuple[Optional[list[np.ndarray]], int]:
    """One seeded attempt; returns (accepted points or None, candidates used)."""
    random_kind = config.mode
    y = x0.copy()
    points = [y]
    generated = 0
    pending_random = 0
    frame: Optional[Frame] = None
    while True:
        if np.linalg.norm(y - x1) < config.tol:
            return points, generated
        if generated >= config.n_max:
            return None, generated
        if frame is None:
            frame = make_frame(cs, y)
            if frame is None:
                # Gram matrix numerically singular at an accepted point:
                # the walk cannot continue from here, give the attempt up.
                result.n_projection += 1
                return None, generated
        if pending_random > 0:
            if random_kind == "gaussian":
                step = random_gaussian_step(cs, y, config, rng, frame)
            else:
                step = metropolis_step(cs, y, x1, config, rng, frame)
            generated += 1
            pending_random -= 1
            if step.accepted:
                result.n_random += 1
                result.max_step = max(
                    result.max_step, float(np.linalg.norm(step.point - y))
                )
                y = step.point
                points.append(y)
                frame = None
                if trace is not None:
                    trace.append((random_kind, y))
            else:
                if step.trigger == "boundary":
                    result.n_boundary += 1
                elif step.trigger == "projection":
                    result.n_projection += 1
                elif step.trigger == "reverse":
                    result.n_reverse += 1
                else:
                    result.n_metropolis += 1
                if trace is not None and step.point is not None:
                    trace.append(("rejected", step.point))
        else:
            step = descent_step(cs, y, x1, config, frame)
            if step.accepted:
                generated += 1
                result.n_descent += 1
                result.max_step = max(
                    result.max_step, float(np.linalg.norm(step.point - y))
                )
                y = step.point
                points.append(y)
                frame = None
                if trace is not None:
                    trace.append(("descent", y))
            elif step.trigger == "stall":
                result.n_stalls += 1
                pending_random = config.n_random
            else:
                generated += 1
                if step.trigger == "boundary":
                    result.n_boundary += 1
                else:
                    result.n_projection += 1
                if trace is not None and step.point is not None:
                    trace.append(("rejected", step.point))
                pending_random = config.n_random


def find_path(
    cs: ConstraintSystem,
    x0: np.ndarray,
    x1: np.ndarray,
    config: PathConfig,
    record_trace: bool = False,
) -> PathResult:
    """Search for a feasible path from x0 to x1 on the constraint manifold.

    Runs up to config.retries independently seeded attempts; each generates
    at most config.n_max candidate points.  Success means reaching a point
    within config.tol of x1.  Both endpoints must be feasible.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    if x0.shape != (cs.dim,) or x1.shape != (cs.dim,):
        raise ValueError("endpoint dimension does not match the system")
    for name, x in (("start", x0), ("target", x1)):
        if not cs.is_feasible(x, config.tol_q):
            raise InfeasibleEndpointError(f"{name} point violates the constraints")
    result = PathResult(found=False, points=None, seed=config.seed)
    last_trace: Optional[list] = None
    for attempt in range(config.retries):
        rng = np.random.default_rng(
            np.random.SeedSequence(config.seed, spawn_key=(attempt,))
        )
        trace: Optional[list] = [("start", x0)] if record_trace else None
        points, generated = _attempt_path(cs, x0, x1, config, rng, result, trace)
        result.n_generated += generated
        result.attempts = attempt + 1
        last_trace = trace
        if points is not None:
            result.found = True
            result.found_attempt = attempt
            result.points = np.asarray(points)
            break
    result.trace = last_trace
    return result


def sample_configuration(
    cs: ConstraintSystem,
    x0: np.ndarray,
    n_steps: int,
    sigma: float,
    seed: int = 0,
    tol_q: float = 1e-10,
) -> np.ndarray:
    """Diffuse along the manifold with n_steps unbiased Metropolis proposals.

    With beta = 0 every feasible, reversible proposal is accepted, so this
    draws a generic configuration from the component of x0 (used to strip
    special geometry from hand-built embeddings before analysing them).
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if not cs.is_feasible(x0, tol_q):
        raise InfeasibleEndpointError("starting point violates the constraints")
    config = PathConfig(sigma=sigma, beta=0.0, tol_q=tol_q, seed=seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xD1FF,)))
    y = x0.copy()
    frame: Optional[Frame] = None
    for _ in range(int(n_steps)):
        if frame is None:
            frame = make_frame(cs, y)
            if frame is None:
                raise RankDeficientError("gradients degenerate while sampling")
        step = metropolis_step(cs, y, x0, config, rng, frame)
        if step.accepted:
            y = step.point
            frame = None
    return y


def dump_path_csv(path: str, result: PathResult):
    """Write a path (trace if recorded, else the accepted points) as CSV.

    Columns: step index, step type, then one column per coordinate.
    """
    if result.trace is not None:
        rows = result.trace
    elif result.points is not None:
        rows = [("path", p) for p in result.points]
    else:
        rows = []
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = len(rows[0][1]) if rows else 0
        writer.writerow(["step", "kind"] + [f"y{k}" for k in range(dim)])
        for idx, (kind, point) in enumerate(rows):
            writer.writerow([idx, kind] + [repr(float(v)) for v in point])
