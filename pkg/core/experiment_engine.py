"""Top-level run orchestrator.

Every verb of the CLI becomes one run: a run folder named after the
config checksum, a report with provenance, tables as CSV plus an Excel
mirror, and a row in the cross-run monitor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from config.settings import ExperimentConfig
from coarse.embedding import embedding_from_function, pullback_chain, pullback_decomposition, pullback_family
from coarse.fibering import fiber_chain, lamp_window_chain, lamplighter_head_action
from coarse.growth import GrowthFunction, is_subexponential
from coarse.product import product_chain
from data.ball_cache import BallCache, default_cache_dir
from data.excel_logger import mirror_table
from data.run_manager import RunManager
from data.run_monitor import RunMonitor
from data.table_writer import write_table
from decomp.chains import build_chain, single_stage_chain
from decomp.oracle import exact_min_families
from decomp.profile import dimension_profile
from decomp.strategies import DecompositionStrategy, MeshRule
from groups.ball import GroupBall, ball, check_left_invariance
from groups.factory import parse_space
from groups.model import check_group_axioms
from spaces.decomposition import DecompositionChain, verify_chain, verify_decomposition
from spaces.families import mesh
from spaces.serialization import load_chain, save_chain
from spaces.space import FiniteMetricSpace, check_metric_axioms, path_space, product_space
from utils.logging_setup import setup_logging
from witness.construction import witness_from_chain, witness_sequence
from witness.verify import variation_table, verify_witness
from . import __version__
from .enums import RunState
from .errors import ConfigError, IntegrityError, ResourceError
from .run_queue import QueueItem, RunQueue

logger = logging.getLogger(__name__)

DEMO_DISCLAIMER = "finite-scale demonstration; asymptotic claim out of scope"
WITNESS_COLUMNS = ["n", "sup_variation", "sup_variation_float", "bound", "support_radius"]


@dataclass
class RunResult:
    run_dir: Path
    report: dict

    @property
    def report_path(self) -> Path:
        return self.run_dir / "report.json"


class ExperimentEngine:
    """Runs the toolkit's constructions as reproducible experiments.

    Lifecycle per run:
        1. RunManager creates ``<experiment>_<checksum[:12]>/`` and saves the config
        2. the run body builds spaces, chains and witnesses, writing tables
        3. report.json is written with checksum, version and generating sets
        4. the run is appended to run_monitor.xlsx
    """

    def __init__(
        self,
        config: ExperimentConfig,
        cache: Optional[BallCache] = None,
        log_level: int = logging.INFO,
    ):
        errors = config.validate()
        if errors:
            raise ConfigError("; ".join(errors))
        self.config = config
        if cache is None and config.cache.enabled:
            cache = BallCache(default_cache_dir(config.cache.directory))
        self.cache = cache
        self.log_level = log_level
        self._state = RunState.IDLE
        self._generating_sets: Dict[str, str] = {}
        self.queue: Optional[RunQueue] = None

    @property
    def state(self) -> RunState:
        return self._state

    # --- building blocks ---

    def space(self, desc: str) -> FiniteMetricSpace:
        check = self.config.ball.check_stable
        if self.cache is not None:
            provider = partial(self.cache.provide, check_stable=check)
        else:
            provider = partial(ball, check_stable=check)
        space = parse_space(desc, budget=self.config.ball.element_budget, provider=provider)
        self._generating_sets[space.name] = space.group.describe() if isinstance(space, GroupBall) else space.name
        return space

    def strategy(self, mesh_rule: Optional[str] = None, kind: Optional[str] = None) -> DecompositionStrategy:
        d = self.config.decomposition
        return DecompositionStrategy.from_names(kind or d.strategy, mesh_rule or d.mesh_rule, d.exact_limit)

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)

    def _table(self, run: RunManager, name: str, header: Sequence[str], rows: List[Sequence]) -> None:
        write_table(run.path(f"{name}.csv"), header, rows)
        mirror_table(run.path(f"{name}.xlsx"), header, rows, title=name)

    def _execute(self, experiment: str, body: Callable[[RunManager], dict]) -> RunResult:
        run = RunManager(self.config, experiment)
        run_dir = run.create()
        setup_logging(run_dir, level=self.log_level)
        self._generating_sets = {}
        start = datetime.now()
        status = "Failed"
        self._state = RunState.RUNNING
        logger.info("Run %s started in %s", experiment, run_dir)
        try:
            body_report = body(run)
            report = {
                "experiment": experiment,
                "config_checksum": run.checksum,
                "version": __version__,
                "generating_sets": [self._generating_sets[k] for k in sorted(self._generating_sets)],
                **body_report,
            }
            run.write_report(report)
            status = "Completed"
            self._state = RunState.COMPLETED
            return RunResult(run_dir, report)
        except Exception:
            self._state = RunState.FAILED
            logger.exception("Run %s failed", experiment)
            raise
        finally:
            RunMonitor(self.config.output_base_dir).log_run(
                start_time=start,
                end_time=datetime.now(),
                status=status,
                experiment=experiment,
                checksum=run.checksum,
                run_folder=str(run_dir),
            )

    def _step(self, run: RunManager) -> None:
        item = self.queue.current
        logger.info("[%d/%d] %s done", self.queue.current_index + 1, self.queue.total, item.label)
        self.queue.advance()
        run.save_progress(self.queue.to_progress_dict())

    # --- verbs ---

    def run_ball(self, desc: str, samples: int = 10_000) -> RunResult:
        def body(run: RunManager) -> dict:
            space = self.space(desc)
            out = {
                "space": space.name,
                "size": len(space),
                "diameter": space.diameter(),
                "metric_violations": check_metric_axioms(space, samples, self._rng()),
            }
            if isinstance(space, GroupBall):
                spec = space.spec
                out["sphere_sizes"] = spec.sphere_sizes
                out["growth_series"] = spec.growth_series()
                out["group_violations"] = check_group_axioms(
                    space.group, space.elements, min(samples, 1000), self._rng())
                out["left_invariance_violations"] = check_left_invariance(space, samples, self._rng())
                rows = [[r, size, spec.ball_size(r)] for r, size in enumerate(spec.sphere_sizes)]
                self._table(run, "growth", ["r", "sphere_size", "ball_size"], rows)
            return out

        return self._execute("ball", body)

    def run_decompose(
        self, desc: str, radius: int, mesh_rule: Optional[str] = None, kind: Optional[str] = None,
    ) -> RunResult:
        def body(run: RunManager) -> dict:
            space = self.space(desc)
            strategy = self.strategy(mesh_rule, kind)
            dec = strategy.apply(space, radius)
            check = verify_decomposition(dec)
            exact = None
            d = strategy.mesh_for(radius)
            if len(space) <= self.config.decomposition.exact_limit:
                exact = exact_min_families(space, radius, d, limit=self.config.decomposition.exact_limit)
            rows = [
                [i, fam.tag, len(fam), mesh(fam), check.separations[i]]
                for i, fam in enumerate(dec.subfamilies)
            ]
            self._table(run, "families", ["family", "tag", "pieces", "mesh", "separation"], rows)
            return {
                "space": space.name,
                "R": radius,
                "D": d,
                "strategy": strategy.describe(),
                "n": dec.n,
                "n_exact": exact,
                "verification": check.to_dict(),
            }

        return self._execute("decompose", body)

    def run_profile(self) -> RunResult:
        """Dimension-growth profile over every configured space family."""
        cfg = self.config

        def body(run: RunManager) -> dict:
            tables = []
            rows = []
            for base in cfg.profile.spaces:
                table = dimension_profile(
                    base,
                    cfg.profile.ball_radii,
                    cfg.profile.radii,
                    build=self.space,
                    mesh_rule=MeshRule.parse(cfg.decomposition.mesh_rule),
                    exact_limit=cfg.decomposition.exact_limit,
                    record_timings=cfg.record_timings,
                    workers=cfg.workers,
                )
                tables.append(table.to_dict())
                rows.extend(r.csv_values() for r in table.rows)
                header = table.columns
            self._table(run, "profile", header, rows)
            return {"profiles": tables}

        return self._execute("profile", body)

    def run_pullback(
        self,
        size: int,
        scale: int,
        radius: int,
        chain_path: Optional[Path] = None,
        source: Optional[str] = None,
    ) -> RunResult:
        """Pull a decomposition and a chain back along x -> scale*x (identity on ids when scale is 1).

        Without *chain_path* the target is path:(scale*(size-1)+1) with a
        chain built at R and 2R; with it, the stored chain's space is the
        target.  *source* (default path:size) names the domain.
        """
        if scale < 1:
            raise ConfigError(f"pullback scale must be >= 1, got {scale}")

        def body(run: RunManager) -> dict:
            src = self.space(source) if source else path_space(size)
            strategy = self.strategy()
            if chain_path is not None:
                chain = load_chain(Path(chain_path))
                if chain.length == 0:
                    raise ConfigError(f"stored chain {chain_path} has no stages")
                target = chain.space
            else:
                target = path_space(scale * (size - 1) + 1)
                chain = build_chain(target, [radius, 2 * radius], strategy, stop_mesh=None)
            if scale == 1:
                f = embedding_from_function(src, target, lambda p: p, 1, 0, name="id")
            else:
                f = embedding_from_function(src, target, lambda p: scale * p, scale, 0, name=f"{scale}x")
            violations = f.verify(rng=self._rng())
            dec = chain.steps[0][0]
            families = [pullback_family(f, fam, dec.radius, mesh(fam)).to_dict() for fam in dec.subfamilies]
            pulled = pullback_decomposition(f, dec)
            s = GrowthFunction.constant(max(chain.widths))
            pulled_chain = pullback_chain(f, chain, s)
            save_chain(pulled_chain.chain, run.path("chain.json"))
            rows = [[r, w] for r, w in zip(pulled_chain.chain.radii, pulled_chain.chain.widths)]
            self._table(run, "pullback", ["R", "width"], rows)
            return {
                "embedding": {k: v for k, v in f.to_dict().items() if k != "mapping"},
                "embedding_violations": violations,
                "target_chain": {"space": target.name, "radii": list(chain.radii), "widths": list(chain.widths)},
                "R": dec.radius,
                "families": families,
                "pulled_decomposition": {
                    "radius": pulled.radius,
                    "n": pulled.n,
                    "verification": verify_decomposition(pulled).to_dict(),
                },
                "pulled_chain": pulled_chain.to_dict(),
            }

        return self._execute("pullback", body)

    def run_product(
        self,
        desc_x: Optional[str],
        desc_y: Optional[str],
        radii: Sequence[int],
        chain_x: Optional[Path] = None,
        chain_y: Optional[Path] = None,
    ) -> RunResult:
        """Product chain of two spaces; a stored chain replaces the built one on its side."""
        if not (desc_x or chain_x) or not (desc_y or chain_y):
            raise ConfigError("product needs a space or a stored chain for each factor")

        def body(run: RunManager) -> dict:
            strategy = self.strategy()

            def factor(desc: Optional[str], path: Optional[Path]) -> DecompositionChain:
                if path is not None:
                    return load_chain(Path(path))
                return build_chain(self.space(desc), radii, strategy, stop_mesh=None)

            cx, cy = factor(desc_x, chain_x), factor(desc_y, chain_y)
            result = product_chain(cx, cy, workers=self.config.workers)
            save_chain(result.chain, run.path("chain.json"))
            rows = [
                [r, wx, wy, w]
                for r, wx, wy, w in zip(result.chain.radii, result.widths_x, result.widths_y, result.chain.widths)
            ]
            self._table(run, "product", ["R", "width_x", "width_y", "width"], rows)
            return {"product": result.to_dict()}

        return self._execute("product", body)

    def run_fiber(
        self,
        ball_radius: int,
        radii: Sequence[int],
        stab_radii: Sequence[int],
        chain_path: Optional[Path] = None,
    ) -> RunResult:
        """Z2 wr Z over the head projection onto a Z-ball, stabilizers split by lamp windows.

        A stored chain must live on the Z-ball of radius 2 * ball_radius.
        """
        def body(run: RunManager) -> dict:
            action = lamplighter_head_action(ball_radius)
            self._generating_sets[action.ball.name] = action.ball.group.describe()
            self._generating_sets[action.target.name] = action.target.group.describe()
            if chain_path is not None:
                cx = load_chain(Path(chain_path), space=action.target)
            else:
                cx = build_chain(action.target, radii, self.strategy(), stop_mesh=None)
            s = GrowthFunction.constant(max(cx.widths, default=1))
            D = cx.terminal_mesh
            stab_chains = {D: lamp_window_chain(D, stab_radii)}
            result = fiber_chain(action, cx, stab_chains, s, workers=self.config.workers)
            save_chain(result.chain, run.path("chain.json"))
            rows = [[r, w] for r, w in zip(result.chain.radii, result.chain.widths)]
            self._table(run, "fiber", ["R", "width"], rows)
            return {"fiber": result.to_dict()}

        return self._execute("fiber", body)

    def run_witness(
        self,
        desc: Optional[str] = None,
        scales: Optional[Sequence[int]] = None,
        include_vectors: bool = False,
    ) -> RunResult:
        cfg = self.config.witness
        desc = desc or cfg.space
        scales = list(scales or cfg.scales)

        def body(run: RunManager) -> dict:
            space = self.space(desc)
            families = witness_sequence(
                space, scales, stages=cfg.stages, strategy=self.strategy(),
                projection_samples=cfg.projection_samples, seed=self.config.seed,
                workers=self.config.workers,
            )
            reports = [verify_witness(w, w.n, Fraction(1, w.n)).to_dict() for w in families]
            table = variation_table(families, cfg.variation_radius)
            self._table(run, "witness", WITNESS_COLUMNS, [r.csv_values() for r in table.rows])
            return {
                "space": space.name,
                "families": [w.to_dict(include_vectors=include_vectors) for w in families],
                "verification": reports,
                "variation": table.to_dict(),
            }

        return self._execute("witness", body)

    def run_demo(self) -> RunResult:
        """(Z wr F_2) x Grigorchuk: chains at 3R, their product, and witnesses thickened from the product chain."""
        demo = self.config.demo
        if demo.wreath_radius > demo.max_wreath_radius:
            raise ResourceError(
                f"wreath ball radius {demo.wreath_radius} > {demo.max_wreath_radius}; shrink N")
        if demo.grigorchuk_radius > demo.max_grigorchuk_radius:
            raise ResourceError(
                f"Grigorchuk ball radius {demo.grigorchuk_radius} > {demo.max_grigorchuk_radius}; shrink N")
        self.queue = RunQueue(
            [QueueItem("wreath chain", f"{demo.wreath_group}@{demo.wreath_radius}"),
             QueueItem("grigorchuk chain", f"grigorchuk@{demo.grigorchuk_radius}"),
             QueueItem("product chain")]
            + [QueueItem("witness", f"n={n}") for n in demo.witness_scales]
        )
        chain_radii = [3 * r for r in demo.radii]

        def body(run: RunManager) -> dict:
            strategy = self.strategy()
            wreath_ball = self.space(f"{demo.wreath_group}@{demo.wreath_radius}")
            cx = build_chain(wreath_ball, chain_radii, strategy, stop_mesh=None)
            self._step(run)
            grig_ball = self.space(f"grigorchuk@{demo.grigorchuk_radius}")
            cy = single_stage_chain(grig_ball, chain_radii[0], strategy)
            self._step(run)
            space = product_space(wreath_ball, grig_ball)
            product = product_chain(cx, cy, space=space, workers=self.config.workers)
            chain_check = verify_chain(product.chain, list(product.chain.widths))
            if not chain_check.passed:
                raise IntegrityError(f"product chain fails verification: {chain_check.errors[:3]}")
            save_chain(product.chain, run.path("chain.json"))
            self._step(run)

            families = []
            reports = []
            for n in demo.witness_scales:
                w = witness_from_chain(
                    space, n, chain=product.chain,
                    projection_samples=self.config.witness.projection_samples,
                    seed=self.config.seed, workers=self.config.workers,
                )
                families.append(w)
                reports.append(verify_witness(w, n, Fraction(1, n)).to_dict())
                self._step(run)
            if not self.queue.is_done:
                raise IntegrityError(f"demo stopped at step {self.queue.current_index + 1} of {self.queue.total}")
            table = variation_table(families, self.config.witness.variation_radius)
            self._table(run, "demo_witness", WITNESS_COLUMNS, [r.csv_values() for r in table.rows])

            # a width bound s is nondecreasing, so tabulate the running maximum
            samples = []
            best = 0
            for r, w in zip(product.chain.radii, product.chain.widths):
                best = max(best, w)
                samples.append((r, best))
            verdict = is_subexponential(GrowthFunction.tabulated(samples))
            return {
                "disclaimer": DEMO_DISCLAIMER,
                "wreath_chain": {"space": wreath_ball.name, "radii": list(cx.radii),
                                 "widths": list(cx.widths), "terminal_mesh": cx.terminal_mesh},
                "grigorchuk_chain": {"space": grig_ball.name, "radii": list(cy.radii),
                                     "widths": list(cy.widths), "terminal_mesh": cy.terminal_mesh},
                "product": product.to_dict(),
                "product_chain_verification": chain_check.to_dict(),
                "product_widths_match": list(product.chain.widths) == [
                    a * b for a, b in zip(product.widths_x, product.widths_y)],
                "growth_verdict": {
                    "subexponential": bool(verdict),
                    "heuristic": getattr(verdict, "heuristic", False),
                    "note": getattr(verdict, "note", ""),
                },
                "thickening_radii": list(demo.radii),
                "witnesses": [w.to_dict() for w in families],
                "verification": reports,
                "variation": table.to_dict(),
                "passed": chain_check.passed and all(r["passed"] for r in reports),
            }

        return self._execute("demo-thm51", body)
