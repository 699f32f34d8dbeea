"""End-to-end experiment: axioms, admissibility, defect envelope, orbit, limit."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .config import ExperimentConfig
from .control import PsiFunction, check_admissibility, regime_constants
from .cstar_core import StabilityError
from .derivation_lab import defect_envelope
from .fixed_point import TabulatedMap, orbit_distances
from .module_space import verify_axioms
from .stabilizer import stabilize, uniqueness_probe

log = logging.getLogger(__name__)

STAGES = ("axioms", "admissibility", "envelope", "orbit", "stabilization", "uniqueness")


@dataclass
class RunArtifacts:
    config: dict
    axioms: object = None
    admissibility: object = None
    envelope: object = None
    orbit: object = None
    stabilization: object = None
    uniqueness: float | None = None
    skipped: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[str]:
        """Names of checks that failed; empty when every section is clean."""
        out = []
        if self.axioms is not None and not self.axioms.passed:
            out += [f"axioms.{name}" for name in self.axioms.failures]
        if self.admissibility is not None and not self.admissibility.admissible:
            out.append("admissibility")
        if self.envelope is not None and self.envelope.violations:
            out.append(f"envelope ({self.envelope.violations} tuples)")
        if self.orbit is not None and not self.orbit.contraction_ok:
            out.append("orbit.contraction")
        st = self.stabilization
        if st is not None:
            if st.bound_violations:
                out.append(f"stabilization.bound ({st.bound_violations} points)")
            limit = 10 * st.tol
            for name in ("additivity_residual", "mu_additivity_residual",
                         "mu_linearity_residual", "derivation_residual"):
                if getattr(st, name) > limit:
                    out.append(f"stabilization.{name}")
        if self.uniqueness is not None and st is not None and self.uniqueness > st.tol:
            out.append("uniqueness")
        return out


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            log.debug("stage %s", name)
            try:
                return fn(*args, **kwargs)
            except StabilityError as err:
                err.stage = name
                raise
        return run
    return wrap


def run_experiment(cfg: ExperimentConfig, stages=STAGES) -> RunArtifacts:
    """Run the requested stages in order; deterministic for a fixed config."""
    # the output section is left out so the report does not depend on where it is written
    doc = cfg.to_dict()
    doc.pop("output")
    art = RunArtifacts(config=doc)
    space = cfg.module_space()
    f = cfg.build_map()
    control = cfg.build_control()
    grid = cfg.build_grid()
    regime, L = regime_constants(control)
    g, run = cfg.grid, cfg.run

    for name in STAGES:
        if name not in stages:
            art.skipped[name] = "not requested"

    if "axioms" in stages:
        art.axioms = _stage("axioms")(verify_axioms)(
            space, list(grid.base_points), tuples=g.tuples, seed=g.seed
        )
    if "admissibility" in stages:
        art.admissibility = _stage("admissibility")(check_admissibility)(control, grid, depth=20)
    if "envelope" in stages:
        art.envelope = _stage("envelope")(defect_envelope)(
            f, control, grid, tuples=g.tuples, seed=g.seed, product_radius=g.product_radius
        )
    if "orbit" in stages:
        art.orbit = _stage("orbit")(orbit_distances)(
            TabulatedMap.tabulate(f, grid), PsiFunction(control, space), regime,
            min(grid.width - 1, run.depth), L,
        )
    if "stabilization" in stages:
        art.stabilization = _stage("stabilization")(stabilize)(
            f, grid, control, run.depth, run.tol,
            envelope=art.envelope, seed=g.seed, pairs=g.tuples, triples=g.tuples,
            product_radius=g.product_radius,
        )
    if "uniqueness" in stages:
        art.uniqueness = _stage("uniqueness")(uniqueness_probe)(f, grid, control, run.depth)
    return art
