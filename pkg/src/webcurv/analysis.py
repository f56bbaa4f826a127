"""End-to-end analysis: sample points, assemble, connect, decide flatness.

The per-point pipeline is deterministic given (web, seed, flags).  Each
result slot s draws its candidate points from the attempt sequence
s, s + N, s + 2N, ... so resampling in one slot never shifts another;
this keeps reports identical whether slots run sequentially or in
parallel.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import connection as conn
from .engine import (
    MTable,
    OrdinarinessVerdict,
    WebDims,
    assemble_systems,
    ordinariness_check,
)
from .errors import DivisionByNonUnit, SingularAtPoint
from .expr import WebSpec
from .jets import SamplePoint, explicit_point, sample_point

DEFAULT_POINTS = 3
DEFAULT_HEIGHT = 1000
DEFAULT_MAX_ATTEMPTS = 20


@dataclass
class PointAnalysis:
    point: SamplePoint
    permutation: list[int] | None  # 0-based reordering of the integrals, if any
    ordinariness: OrdinarinessVerdict | None
    flat: bool | None
    flat_at_zero_deformation: bool | None
    deformation_nonzero: bool | None
    witness: conn.CurvatureWitness | None
    prefix: int | None
    discarded: list[str] = field(default_factory=list)  # attempts rejected before this point
    error: str | None = None
    matrices: dict | None = None

    @property
    def ordinary(self) -> bool:
        return self.ordinariness is not None and self.ordinariness.ordinary


@dataclass
class AnalysisResult:
    web: WebSpec
    dims: WebDims
    order: int
    seed: int
    height: int
    points: list[PointAnalysis]
    verdict: str  # FLAT | NOT_FLAT | NOT_CALIBRATED | NOT_ORDINARY | ERROR
    rank: int | None
    rank_bounds: tuple[int, int] | None
    timings: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {
            "FLAT": 0,
            "NOT_FLAT": 1,
            "NOT_CALIBRATED": 2,
            "NOT_ORDINARY": 3,
        }.get(self.verdict, 4)


def analyze_point(
    web: WebSpec,
    point: SamplePoint,
    order: int,
    dims: WebDims | None = None,
    permutation=None,
    keep_matrices: bool = False,
    prefix_scan: bool = True,
) -> PointAnalysis:
    """Run the full pipeline at one base point.

    Raises DivisionByNonUnit when the point hits a pole and SingularAtPoint
    when the trivialization submatrix is residue-singular; both signal the
    caller to resample or permute.
    """
    dims = dims or WebDims.of_web(web)
    if permutation is not None:
        web = web.with_integrals([web.integrals[i] for i in permutation])
    mtable = MTable(web, point, order)
    systems = assemble_systems(web, mtable, dims)
    verdict = ordinariness_check(systems, dims, mtable)
    result = PointAnalysis(
        point=point,
        permutation=list(permutation) if permutation is not None else None,
        ordinariness=verdict,
        flat=None,
        flat_at_zero_deformation=None,
        deformation_nonzero=None,
        witness=None,
        prefix=None,
    )
    if not verdict.ordinary:
        return result
    triv = conn.kernel_basis(systems.mm, dims)  # may raise SingularAtPoint
    u_mat = conn.prolongation(systems.qq, systems.pp)
    forms = conn.connection_form(triv, u_mat, mtable, dims)
    kmats = conn.curvature(forms, dims)
    summary = conn.curvature_summary(kmats, mtable.ctx)
    result.flat = summary["flat"]
    result.flat_at_zero_deformation = summary["flat_at_zero_deformation"]
    result.deformation_nonzero = summary["deformation_nonzero"]
    result.witness = summary["witness"]
    if not result.flat and prefix_scan:
        result.prefix = conn.invariant_flat_prefix(forms, kmats, dims)
    if keep_matrices:
        result.matrices = {
            "MM": systems.mm,
            "QQ": systems.qq,
            "PP": systems.pp,
            "U": u_mat,
            "W": triv.w,
            "A": forms,
            "K": kmats,
            "ctx": mtable.ctx,
        }
    return result


def _seeded_permutation(d: int, seed: int, trial: int) -> list[int]:
    import random

    rng = random.Random(f"webcurv-perm:{seed}:{trial}")
    perm = list(range(d))
    rng.shuffle(perm)
    return perm


def _analyze_slot(args) -> PointAnalysis:
    (web, dims, order, slot, n_points, seed, height, at, try_permutations,
     max_attempts, keep_matrices, prefix_scan) = args
    discarded: list[str] = []
    for k in range(max_attempts):
        attempt = slot + k * n_points
        point = at if at is not None else sample_point(web.n, seed, attempt, height)
        try:
            result = analyze_point(
                web, point, order, dims,
                keep_matrices=keep_matrices, prefix_scan=prefix_scan,
            )
            result.discarded = discarded
            return result
        except DivisionByNonUnit as exc:
            discarded.append(f"attempt {attempt}: pole ({exc})")
        except SingularAtPoint as exc:
            recovered = None
            for trial in range(1, try_permutations + 1):
                perm = _seeded_permutation(web.d, seed, trial)
                try:
                    recovered = analyze_point(
                        web, point, order, dims, permutation=perm,
                        keep_matrices=keep_matrices, prefix_scan=prefix_scan,
                    )
                    break
                except (DivisionByNonUnit, SingularAtPoint):
                    continue
            if recovered is not None:
                recovered.discarded = discarded
                return recovered
            discarded.append(f"attempt {attempt}: singular trivialization ({exc})")
        if at is not None:
            break  # an explicit point is not resampled
    failed = PointAnalysis(
        point=at if at is not None else sample_point(web.n, seed, slot, height),
        permutation=None,
        ordinariness=None,
        flat=None,
        flat_at_zero_deformation=None,
        deformation_nonzero=None,
        witness=None,
        prefix=None,
        discarded=discarded,
        error="no usable point found" if at is None else "explicit point unusable",
    )
    return failed


def analyze(
    web: WebSpec,
    n_points: int = DEFAULT_POINTS,
    seed: int = 0,
    height: int = DEFAULT_HEIGHT,
    order: int | None = None,
    at=None,
    try_permutations: int = 0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    keep_matrices: bool = False,
    prefix_scan: bool = True,
    jobs: int = 1,
) -> AnalysisResult:
    """Analyze a web at n_points deterministic sample points."""
    t0 = time.perf_counter()
    dims = WebDims.of_web(web)
    order = order if order is not None else dims.k0 + 1
    if at is not None:
        at = explicit_point(at)
        n_points = 1
    if not dims.calibrated:
        return AnalysisResult(
            web, dims, order, seed, height, [], "NOT_CALIBRATED",
            rank=None, rank_bounds=(0, dims.ro),
            timings={"total": time.perf_counter() - t0},
        )
    slot_args = [
        (web, dims, order, slot, n_points, seed, height, at, try_permutations,
         max_attempts, keep_matrices, prefix_scan)
        for slot in range(n_points)
    ]
    if jobs > 1 and n_points > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_analyze_slot, slot_args))
    else:
        points = [_analyze_slot(a) for a in slot_args]

    usable = [p for p in points if p.error is None]
    ordinary = [p for p in usable if p.ordinary]
    if not usable or not ordinary:
        verdict = "ERROR" if not usable else "NOT_ORDINARY"
        return AnalysisResult(
            web, dims, order, seed, height, points, verdict,
            rank=None, rank_bounds=None,
            timings={"total": time.perf_counter() - t0},
        )
    flats = [p.flat for p in ordinary]
    if all(flats):
        verdict, rank, bounds = "FLAT", dims.ro, (dims.ro, dims.ro)
    else:
        # a single nonzero curvature entry at an exact rational point proves
        # non-flatness; vanishing everywhere is only probabilistic evidence
        verdict, rank = "NOT_FLAT", None
        prefix = max((p.prefix or 0) for p in ordinary if p.flat is False)
        bounds = (prefix, dims.ro - 1)
    return AnalysisResult(
        web, dims, order, seed, height, points, verdict,
        rank=rank, rank_bounds=bounds,
        timings={"total": time.perf_counter() - t0},
    )
