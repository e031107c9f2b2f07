"""Main engine - orchestrates all stages"""

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union
import logging

from .algebra.presentation import DGPresentation, DSquaredReport, check_d_squared
from .config.engine_config import EngineConfig, load_engine_config
from .config.verify_targets import VerifyTarget, load_verify_targets
from .stages.ainfty import AInftyMorphism, ContractingHomotopy, QuotientAlgebra, solve_components
from .stages.cyclic import CyclicHomology, FinDimAlgebra, NormReport, hc_dims, hh_dims, norm_check
from .stages.dsl_parser import PresentationFile, parse_presentation, print_presentation
from .stages.homology import BlockHomology, HomologyTable
from .stages.periodicity import PeriodicityReport, periodicity_report
from .stages.representation import RepresentationFunctor, load_representation_point
from .stages.tangent import TangentComplex, tangent_complex
from .stages.traces import TraceReport, trace_report
from .utils.constants import TRIE_AVAILABLE
from .utils.errors import DRepError, PresentationError

logger = logging.getLogger(__name__)

BUILTIN_ALGEBRAS: Dict[str, Callable[[], FinDimAlgebra]] = {
    'k': FinDimAlgebra.ground_field,
    'dual-numbers': FinDimAlgebra.dual_numbers,
    'kxk': FinDimAlgebra.product_kk,
    'm2': lambda: FinDimAlgebra.matrix_algebra(2),
}


@dataclass
class CheckReport:
    """Outcome of `check`: the parsed file and d^2 on its resolution"""
    presentation: PresentationFile
    d_squared: Optional[DSquaredReport] = None
    weight_decreasing: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.d_squared is None or self.d_squared.passed

    def to_dict(self) -> Dict:
        return {
            'passed': self.passed,
            'presentation': self.presentation.to_dict(),
            'd_squared': self.d_squared.to_dict() if self.d_squared else None,
            'weight_decreasing': list(self.weight_decreasing),
        }

    def __str__(self) -> str:
        lines = [f"{self.presentation.name or self.presentation.source or 'presentation'}: "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        if self.d_squared is not None:
            lines.append(f"  {self.d_squared}")
        if self.weight_decreasing:
            lines.append(f"  weight-decreasing differentials on {', '.join(self.weight_decreasing)}")
        return "\n".join(lines)


@dataclass
class VerifyResult:
    """Computed value of a verify target against its golden file"""
    name: str
    passed: bool
    expected: Any = None
    actual: Any = None
    detail: str = ""

    def to_dict(self) -> Dict:
        return {'name': self.name, 'passed': self.passed, 'expected': self.expected,
                'actual': self.actual, 'detail': self.detail}

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"verify {self.name}: {status}"
        return f"{text} ({self.detail})" if self.detail else text


class DRepEngine:
    """
    Derived representation engine

    Loads presentation files once (cached by content digest), builds the
    matrix reductions, homotopies and A-infinity components on demand and
    exposes one method per command.
    """

    def __init__(self, config: Optional[Dict] = None, verify_targets: Optional[Dict] = None):
        """
        Args:
            config: Overrides for config/engine_config.json
                Example: {'max_weight': 8, 'threads': 4, 'pivot_policy': 'first_nonzero'}
            verify_targets: Replacement for config/verify_targets.json (name -> target fields)
        """
        logger.info("=" * 80)
        logger.info("INITIALIZING DERIVED REPRESENTATION ENGINE")
        logger.info("=" * 80)

        self.config: EngineConfig = load_engine_config(config)
        self.verify_targets: Dict[str, VerifyTarget] = load_verify_targets(verify_targets)

        self._cache: Dict[tuple, Any] = {}
        self.stats = {
            'builds': 0,
            'cache_hits': 0,
            'cache_misses': 0,
            'errors': 0,
            'total_time_ms': 0.0,
        }

        logger.info(f"✓ Bounds: homological degree <= {self.config.max_homdeg}, weight <= {self.config.max_weight}")
        logger.info(f"✓ Pivot policy: {self.config.pivot_policy.value}, threads: {self.config.worker_threads}")
        if self.config.effective_memory_budget_mb is not None:
            logger.info(f"✓ Memory budget: {self.config.effective_memory_budget_mb:.0f} MB")
        if not TRIE_AVAILABLE:
            logger.info("⚠ pygtrie not installed: entry-name collisions checked by linear scan")
        logger.info(f"✓ {len(self.verify_targets)} verify targets loaded")
        logger.info("=" * 80)

    # ------------------------------------------------------------------------
    # caching
    # ------------------------------------------------------------------------

    def _cached(self, key: tuple, build: Callable[[], Any]) -> Any:
        if key in self._cache:
            self.stats['cache_hits'] += 1
            return self._cache[key]
        self.stats['cache_misses'] += 1
        start = time.time()
        value = build()
        self._cache[key] = value
        self.stats['builds'] += 1
        self.stats['total_time_ms'] += (time.time() - start) * 1000
        return value

    def _run(self, label: str, action: Callable[[], Any]) -> Any:
        try:
            return action()
        except DRepError as e:
            logger.error(f"{label} failed: {e}", exc_info=True)
            self.stats['errors'] += 1
            raise

    def load(self, source: Union[str, Path]) -> PresentationFile:
        """Parse a `.drep` file once per distinct content"""
        path = Path(source)
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
        digest = hashlib.sha256(text.encode('utf-8')).hexdigest()

        def parse() -> PresentationFile:
            pf = parse_presentation(text, str(path))
            pf.digest = digest
            return pf

        return self._cached(('file', digest), parse)

    def _resolution(self, source) -> DGPresentation:
        pf = self.load(source)
        if pf.resolution is None:
            raise PresentationError(f"{pf.source or 'input'} has no [resolution] section")
        return pf.resolution

    def functor(self, source, d: int) -> RepresentationFunctor:
        pf = self.load(source)
        return self._cached(('functor', pf.digest, d), lambda: RepresentationFunctor(self._resolution(source), d))

    def components(self, source, n_max: int, w_max: int) -> AInftyMorphism:
        """A-infinity components f_1..f_{n_max+1} of a weight-homogeneous resolution"""
        pf = self.load(source)
        R = self._resolution(source)

        def build() -> AInftyMorphism:
            A = QuotientAlgebra.from_resolution(R, w_max)
            homotopy = ContractingHomotopy(A, n_max, w_max, self.config.pivot_policy)
            return solve_components(homotopy, n_max + 1, w_max)

        return self._cached(('components', pf.digest, n_max, w_max), build)

    def clear_cache(self) -> None:
        """Clear built presentations, functors and homotopies"""
        self._cache.clear()

    def get_stats(self) -> Dict:
        return self.stats.copy()

    # ------------------------------------------------------------------------
    # commands
    # ------------------------------------------------------------------------

    def check(self, source) -> CheckReport:
        def action() -> CheckReport:
            pf = self.load(source)
            report = CheckReport(pf)
            if pf.resolution is not None:
                report.d_squared = check_d_squared(pf.resolution)
                report.weight_decreasing = pf.resolution.weight_decreasing_generators()
            if report.passed:
                logger.info(f"✓ {pf.name or source} checked")
            return report
        return self._run("check", action)

    def build(self, source, d: int, nc: bool = False) -> str:
        """Canonical DSL text of R_V (or the matrix reduction R~ with nc=True)"""
        def action() -> str:
            functor = self.functor(source, d)
            presentation = functor.reduced if nc else functor.abelianized
            return print_presentation(PresentationFile(name=presentation.name, resolution=presentation))
        return self._run("build", action)

    def homology(self, source, d: int, n_max: Optional[int] = None, w_max: Optional[int] = None,
                 slack: Optional[int] = None, reweight: Optional[int] = None) -> HomologyTable:
        """H_n(R_V) per weight block; `reweight` assigns one weight to every generator first"""
        def action() -> HomologyTable:
            RV = self.functor(source, d).abelianized
            if reweight is not None:
                RV = RV.reweighted({g.name: reweight for g in RV.generators})
            blocks = BlockHomology(RV, self.config.pivot_policy, self.config.dense_fill_threshold,
                                   self.config.effective_memory_budget_mb)
            table = blocks.homology_dims(
                self.config.max_homdeg if n_max is None else n_max,
                self.config.max_weight if w_max is None else w_max,
                self.config.slack_cap if slack is None else slack,
                self.config.worker_threads,
            )
            flagged = sum(1 for (n, w) in table.status if not table.valid(n, w))
            if flagged:
                logger.warning(f"⚠ {flagged} homology cells could not be stabilized")
            return table
        return self._run("homology", action)

    def algebra(self, source, w_max: Optional[int] = None) -> FinDimAlgebra:
        """Builtin finite-dimensional algebra by name, or the weight truncation of a file's quotient"""
        if str(source) in BUILTIN_ALGEBRAS:
            return BUILTIN_ALGEBRAS[str(source)]()
        pf = self.load(source)
        w_max = self.config.max_weight if w_max is None else w_max
        return self._cached(('algebra', pf.digest, w_max),
                            lambda: QuotientAlgebra.from_resolution(self._resolution(source), w_max).to_fin_dim())

    def cyclic(self, source, n_max: int, w_max: Optional[int] = None, hochschild: bool = False) -> CyclicHomology:
        def action() -> CyclicHomology:
            A = self.algebra(source, w_max)
            graded = w_max if str(source) not in BUILTIN_ALGEBRAS else None
            compute = hh_dims if hochschild else hc_dims
            return compute(A, n_max, graded, self.config.worker_threads, self.config.effective_memory_budget_mb)
        return self._run("cyclic", action)

    def norm(self, source, n_max: int) -> NormReport:
        return self._run("norm", lambda: norm_check(self.algebra(source), n_max, self.config.effective_memory_budget_mb))

    def trace(self, source, d: int, n_max: int, w_max: int, gl_samples: Optional[int] = None) -> TraceReport:
        def action() -> TraceReport:
            f = self.components(source, n_max, w_max)
            samples = self.config.gl_samples if gl_samples is None else gl_samples
            return trace_report(f, self.functor(source, d), n_max, w_max, samples,
                                self.config.gl_entry_bound, self.config.random_seed, self.config.gl_control)
        return self._run("trace", action)

    def tangent(self, source, d: int, rep: Union[str, Path]) -> TangentComplex:
        def action() -> TangentComplex:
            pf = self.load(source)
            if pf.algebra is None:
                raise PresentationError(f"{pf.source or 'input'} has no [algebra] section")
            with open(rep, 'r', encoding='utf-8') as f:
                point = load_representation_point(f.read(), pf.algebra, d)
            return tangent_complex(pf.algebra, self._resolution(source), d, point)
        return self._run("tangent", action)

    def periodicity(self, source, d: int, w_max: int) -> PeriodicityReport:
        return self._run("periodicity", lambda: periodicity_report(self._resolution(source), d, w_max))

    # ------------------------------------------------------------------------
    # golden verification
    # ------------------------------------------------------------------------

    def verify(self, name: str) -> VerifyResult:
        if name not in self.verify_targets:
            raise KeyError(f"Unknown verify target '{name}' (known: {', '.join(sorted(self.verify_targets))})")
        target = self.verify_targets[name]
        golden_path = target.path(target.golden)
        with open(golden_path, 'r', encoding='utf-8') as f:
            golden_text = f.read()
        logger.info(f"Verifying {name} against {golden_path.name}")
        source = target.path(target.file) if target.file else target.algebra

        if target.kind == "build":
            actual = self.build(source, target.dim, target.nc)
            passed = actual == golden_text
            return VerifyResult(name, passed, golden_text, actual,
                                "" if passed else "printed presentation differs from the golden file")

        expected = json.loads(golden_text)
        if target.kind == "homology":
            table = self.homology(source, target.dim, target.n_max, target.w_max, reweight=target.reweight)
            actual = {'dims': [table.by_degree(n) for n in range(target.n_max + 1)],
                      'valid': all(table.valid(n, w) for (n, w) in table.status)}
        elif target.kind == "norm":
            report = self.norm(source, target.n_max)
            actual = {'passed': report.passed, 'cc_dims': [report.cc_dims[n] for n in sorted(report.cc_dims)]}
        elif target.kind == "traces":
            report = self.trace(source, target.dim, target.n_max, target.w_max, target.gl_samples)
            actual = {'passed': report.passed,
                      'residual_columns': sum(len(r) for r in report.residuals.values()),
                      'gl_invariant': report.gl.passed if report.gl else None,
                      'gl_control_moved': report.gl.control_moved if report.gl else None}
        elif target.kind == "periodicity":
            report = self.periodicity(source, target.dim, target.w_max)
            actual = {'passed': report.passed, 'rows_exact': report.rows_exact, 'w_max': report.w_max}
        else:
            complex_ = self.tangent(source, target.dim, target.path(target.rep))
            actual = {'dims': complex_.dims}

        mismatched = sorted(k for k in expected if actual.get(k) != expected[k])
        return VerifyResult(name, not mismatched, expected, actual,
                            f"mismatch in {', '.join(mismatched)}" if mismatched else "")
