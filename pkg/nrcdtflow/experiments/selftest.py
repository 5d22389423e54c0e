"""
Invariant suites run by `nrcdtflow selftest`.

Each suite draws seeded random instances at reduced sizes and checks one
family of properties:

- isometry: exact CDT distance equals the 1-D W_2 oracle
- contraction: slice distances never exceed the 2-D transport distance
- adjointness: linear splatting is the adjoint of back projection
- normalization: standardized columns and the degenerate-direction guard
- bounds: perturbation radii of the max and mean profiles hold
- determinism: generation and extraction ignore the worker count

Failures are collected into SuiteResult objects, never raised.
"""

from __future__ import annotations

import logging
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..classify.features import FeatureConfig, extract_feature_sets
from ..datagen.dataset import build_dataset, write_dataset
from ..datagen.params import AffineRanges, CorruptionRanges, DatasetSpec
from ..logging_config import log_with_context
from ..ot_oracle import w_1d, w_2d_assignment
from ..transforms import nrcdt
from ..transforms.cdt import cdt_distance_exact, exact_rcdt, rcdt
from ..transforms.measures import DiscreteMeasure1D, DiscreteMeasure2D, ReferenceMeasure, diameter, uniform_atoms
from ..transforms.nrcdt import DegenerateDirection, FeatureTag, RobustnessBudget, max_nrcdt, mean_nrcdt, min_std
from ..transforms.radon import AngleGrid, back_project_grid, exact_slices, sinogram

logger = logging.getLogger(__name__)

TOLERANCE = 1e-10


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    runtime_s: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def expect(self, condition: bool, message: str) -> None:
        self.checks += 1
        if not condition:
            self.failures.append(message)


@dataclass
class SelftestReport:
    results: List[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> str:
        lines = []
        for r in self.results:
            status = "PASS" if r.passed else "FAIL"
            lines.append(f"{status} {r.name}: {r.checks} checks, {len(r.failures)} failures ({r.runtime_s:.2f}s)")
            lines.extend(f"    {message}" for message in r.failures[:5])
        return "\n".join(lines)


# ============================================================================
# Random instances
# ============================================================================

def _measure_1d(rng: np.random.Generator, max_atoms: int = 8) -> DiscreteMeasure1D:
    n = int(rng.integers(1, max_atoms + 1))
    return DiscreteMeasure1D.from_atoms(rng.uniform(-1.0, 1.0, n), rng.uniform(0.1, 1.0, n))


def _uniform_2d(rng: np.random.Generator, n: int, radius: float = 0.6) -> DiscreteMeasure2D:
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    return uniform_atoms(np.column_stack((r * np.cos(angle), r * np.sin(angle))))


def _weighted_2d(rng: np.random.Generator, n: int, radius: float = 0.6) -> DiscreteMeasure2D:
    points = _uniform_2d(rng, n, radius).points
    return DiscreteMeasure2D.from_atoms(points, rng.uniform(0.1, 1.0, n))


# ============================================================================
# Suites
# ============================================================================

def check_isometry(rng: np.random.Generator, trials: int = 100) -> SuiteResult:
    result = SuiteResult("isometry")
    for trial in range(trials):
        a, b = _measure_1d(rng), _measure_1d(rng)
        exact = cdt_distance_exact(a, b)
        oracle = w_1d(a, b, p=2)
        result.expect(abs(exact - oracle) <= TOLERANCE, f"trial {trial}: CDT distance {exact:.12g} vs W2 {oracle:.12g}")
    return result


def check_contraction(rng: np.random.Generator, trials: int = 30, angles: int = 16, atoms: int = 6) -> SuiteResult:
    result = SuiteResult("contraction")
    grid = AngleGrid(angles)
    for trial in range(trials):
        n = int(rng.integers(1, atoms + 1))
        a, b = _uniform_2d(rng, n), _uniform_2d(rng, n)
        for p in (2, float("inf")):
            bound = w_2d_assignment(a, b, p) + 1e-12
            worst = max(w_1d(sa, sb, p) for sa, sb in zip(exact_slices(a, grid), exact_slices(b, grid)))
            result.expect(worst <= bound, f"trial {trial}, p={p}: slice distance {worst:.6g} exceeds {bound:.6g}")
    return result


def check_adjointness(rng: np.random.Generator, trials: int = 20, angles: int = 12, radii: int = 65) -> SuiteResult:
    result = SuiteResult("adjointness")
    grid = AngleGrid(angles)
    for trial in range(trials):
        m = _weighted_2d(rng, int(rng.integers(1, 40)), radius=0.9)
        profiles = rng.normal(size=(angles, radii))
        s = sinogram(m, grid, radii)
        left = float(np.sum(s.masses * profiles)) / angles
        right = float(m.masses @ back_project_grid(profiles, grid, m.points))
        result.expect(abs(left - right) <= 1e-12 * max(1.0, abs(left)), f"trial {trial}: {left:.15g} vs {right:.15g}")
    return result


def check_normalization(rng: np.random.Generator, trials: int = 20, angles: int = 16, radii: int = 129) -> SuiteResult:
    result = SuiteResult("normalization")
    grid = AngleGrid(angles)
    ref = ReferenceMeasure(32)
    for trial in range(trials):
        m = _weighted_2d(rng, int(rng.integers(10, 60)))
        for label, f in (("exact", exact_rcdt(m, grid, ref)), ("binned", rcdt(sinogram(m, grid, radii), ref))):
            try:
                n = nrcdt.normalize_field(f)
            except DegenerateDirection as exc:
                result.expect(False, f"trial {trial} ({label}): generic measure rejected: {exc}")
                continue
            means = np.abs(n.values.mean(axis=0)).max()
            stds = np.abs(np.sqrt(np.mean(n.values ** 2, axis=0)) - 1.0).max()
            result.expect(means <= TOLERANCE, f"trial {trial} ({label}): column mean {means:.3e}")
            result.expect(stds <= TOLERANCE, f"trial {trial} ({label}): column std off by {stds:.3e}")

    # atoms on the x-axis project to a single point along the y-axis
    vertical = AngleGrid(4)
    for trial in range(trials):
        t = rng.uniform(-0.5, 0.5, int(rng.integers(2, 10)))
        line = DiscreteMeasure2D.from_atoms(np.column_stack((t, np.zeros_like(t))))
        f = exact_rcdt(line, vertical, ref)
        with np.errstate(all="ignore"):
            try:
                nrcdt.normalize_field(f)
                rejected = False
            except DegenerateDirection:
                rejected = True
        result.expect(rejected, f"trial {trial}: collinear support was normalized")
    return result


def check_bounds(rng: np.random.Generator, trials: int = 30, angles: int = 32) -> SuiteResult:
    result = SuiteResult("bounds")
    grid = AngleGrid(angles)
    ref = ReferenceMeasure(64)
    checked = 0
    for trial in range(trials):
        template = _weighted_2d(rng, int(rng.integers(8, 30)), radius=0.5)
        base = exact_rcdt(template, grid, ref)
        c0 = min_std(base)
        epsilon = float(rng.uniform(0.0, 0.4)) * c0
        step = rng.normal(size=template.points.shape)
        step *= (epsilon * rng.uniform(0.0, 1.0, (step.shape[0], 1))) / np.linalg.norm(step, axis=1, keepdims=True)
        moved = DiscreteMeasure2D.from_atoms(template.points + step, template.masses)

        try:
            n_base = nrcdt.normalize_field(base)
            n_moved = nrcdt.normalize_field(exact_rcdt(moved, grid, ref))
        except DegenerateDirection:
            continue
        checked += 1
        budget = RobustnessBudget(epsilon=epsilon, c0=c0, diam=diameter(template))
        sup_gap = float(np.abs(max_nrcdt(n_base).values - max_nrcdt(n_moved).values).max())
        rho_gap = float(ref.rho_norm(mean_nrcdt(n_base).values - mean_nrcdt(n_moved).values))
        limit_sup = nrcdt.winf_radius(budget) + 1e-12
        limit_rho = nrcdt.w2_radius(budget) + 1e-12
        result.expect(sup_gap <= limit_sup, f"trial {trial}: max profile moved {sup_gap:.4g} > {limit_sup:.4g}")
        result.expect(rho_gap <= limit_rho, f"trial {trial}: mean profile moved {rho_gap:.4g} > {limit_rho:.4g}")
    result.expect(checked > 0, "no perturbation trial could be evaluated")
    return result


def check_determinism(rng: np.random.Generator, image_size: int = 64, angles: int = 8) -> SuiteResult:
    result = SuiteResult("determinism")
    spec = DatasetSpec(
        template_ids=(1, 6, 11),
        samples_per_class=2,
        image_size=image_size,
        affine=AffineRanges.full(scale=(0.75, 1.0), shear=15.0, shift=4.0),
        corruption=CorruptionRanges(frequency=(0.5, 2.0), amplitude=(1.0, 2.0), salt_count=(1, 2), salt_radius=2.0),
        seed=int(rng.integers(0, 2 ** 63)),
    )
    serial = build_dataset(spec, max_workers=1)
    threaded = build_dataset(spec, max_workers=4)
    result.expect(np.array_equal(serial.images, threaded.images), "images depend on the worker count")

    config = FeatureConfig(points=16, angles=angles, radii=65)
    tags = [FeatureTag.MNRCDT, FeatureTag.ANRCDT, FeatureTag.RCDT_FLAT]
    one = extract_feature_sets(serial.measures(), serial.labels, tags, config, max_workers=1)
    many = extract_feature_sets(threaded.measures(), threaded.labels, tags, config, max_workers=4)
    for tag in tags:
        same = np.array_equal(one[tag].vectors, many[tag].vectors)
        result.expect(same, f"{tag.value} features depend on the worker count")

    with tempfile.TemporaryDirectory() as tmp:
        first = write_dataset(serial, Path(tmp) / "a")
        second = write_dataset(threaded, Path(tmp) / "b")
        for path in sorted(first.iterdir()):
            same = path.read_bytes() == (second / path.name).read_bytes()
            result.expect(same, f"{path.name} differs between runs")
    return result


SUITES: Dict[str, Callable[[np.random.Generator], SuiteResult]] = {
    "isometry": check_isometry,
    "contraction": check_contraction,
    "adjointness": check_adjointness,
    "normalization": check_normalization,
    "bounds": check_bounds,
    "determinism": check_determinism,
}


def selftest(suites: Optional[Sequence[str]] = None, seed: int = 0) -> SelftestReport:
    """Run the named suites (all by default); every suite gets its own seeded generator"""
    names = list(suites) if suites else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"Unknown suites: {unknown}")

    results = []
    for position, name in enumerate(names):
        rng = np.random.default_rng([seed, position])
        started = time.perf_counter()
        try:
            outcome = SUITES[name](rng)
        except Exception as exc:
            logger.exception(f"Suite {name} crashed")
            outcome = SuiteResult(name, checks=1, failures=[f"{type(exc).__name__}: {exc}"])
        outcome.runtime_s = time.perf_counter() - started
        log_with_context(
            logger,
            "info" if outcome.passed else "error",
            f"Selftest {name}: {'passed' if outcome.passed else 'failed'}",
            suite=name,
            checks=outcome.checks,
            failures=len(outcome.failures),
        )
        results.append(outcome)
    return SelftestReport(results)
