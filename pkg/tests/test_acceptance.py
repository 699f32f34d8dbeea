"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are printed in the "acceptance criteria" section of the pytest
terminal summary.
"""

import numpy as np
import pytest

from cstar_stability import cli
from cstar_stability.config import ValidationError, from_dict, preset
from cstar_stability.control import ControlFunction, PsiFunction, regime_constants
from cstar_stability.derivation_lab import (
    COMMUTATOR,
    SKEW,
    Derivation,
    defect_envelope,
    derivation_residual,
    non_adjointable_witness,
    random_skew,
)
from cstar_stability.fixed_point import (
    SampleGrid,
    TabulatedMap,
    apply_J,
    contraction_check,
    gen_distance,
    random_tabulated,
)
from cstar_stability.module_space import ModuleSpace, verify_axioms
from cstar_stability.stabilizer import (
    StabilizedMap,
    scalar_linearity_check,
    stabilize,
    three_unimodular,
    uniqueness_probe,
)

SHOWCASES = ("doubling", "halving")


def showcase(name):
    cfg = preset(name)
    return cfg, cfg.build_map(), cfg.build_grid(), cfg.build_control()


@pytest.fixture(scope="module")
def stabilized():
    out = {}
    for name in SHOWCASES:
        cfg, f, grid, c = showcase(name)
        out[name] = stabilize(f, grid, c, cfg.run.depth, cfg.run.tol, seed=cfg.grid.seed)
    return out


def test_c01_axioms(criterion):
    spaces = [ModuleSpace.vectors(n) for n in (1, 2, 4)] + [ModuleSpace.matrices(k) for k in (2, 3)]
    worst = {}
    for i, space in enumerate(spaces):
        rep = verify_axioms(space, tol=1e-10, tuples=500, seed=i)
        worst[str(space)] = max(rep.residuals.values())
    ok = max(worst.values()) <= 1e-10
    assert criterion(1, "module axioms, 500 tuples per space", ok, f"max residual {max(worst.values()):.2e}")


def test_c02_derivations(criterion):
    rng = np.random.default_rng(2)
    worst = 0.0
    for space, kind in ((ModuleSpace.vectors(3), SKEW), (ModuleSpace.matrices(2), COMMUTATOR)):
        d = Derivation(kind, random_skew(space.dim, 11), space)
        x, y, z = (space.random_element(rng, 1000) for _ in range(3))
        for i in range(1000):
            worst = max(worst, derivation_residual(d, space, x[i], y[i], z[i]))
    wit = non_adjointable_witness(2).residual
    ok = worst <= 1e-10 and abs(wit - 2) <= 1e-12
    assert criterion(2, "derivation certification and witness", ok,
                     f"max residual {worst:.2e}, witness {wit!r}")


def test_c03_contraction(criterion):
    space = ModuleSpace.vectors(2)
    grid = SampleGrid.generate(space, 8, 12, seed=3)
    details, ok = [], True
    for p in (0.0, 0.5, 0.9, 1.5, 2.0, 3.0):
        c = ControlFunction(beta=1.0, p=p)
        regime, L = regime_constants(c)
        psi = PsiFunction(c, space)
        rng = np.random.default_rng(int(100 * p))
        pairs = [(random_tabulated(grid, rng, psi), random_tabulated(grid, rng, psi)) for _ in range(100)]
        rep = contraction_check(pairs, psi, regime, L, slack=1e-12)
        ok &= rep.violations == 0
        details.append(f"p={p}:{regime[0]}{rep.violations}")
    assert criterion(3, "contraction of J, 100 pairs per p", ok, " ".join(details))


def test_c04_doubling_showcase(criterion, stabilized):
    cfg, f, grid, c = showcase("doubling")
    env = defect_envelope(f, c, grid, tuples=cfg.grid.tuples, seed=cfg.grid.seed)
    rep = stabilized["doubling"]
    eps, p = cfg.perturbation.epsilon, cfg.perturbation.p
    closed = np.max(np.abs(rep.distance - eps * grid.norms**p))
    residual = max(rep.additivity_residual, rep.mu_additivity_residual,
                   rep.mu_linearity_residual, rep.derivation_residual)
    checks = {
        "a": env.violations == 0,
        "b": rep.cauchy_step <= 1e-9,
        "c": closed <= 1e-9 and rep.bound_violations == 0 and np.all(rep.distance <= rep.bound),
        "d": residual <= 1e-8,
        "e": abs(rep.rate - 2**-0.5) <= 1e-6,
    }
    detail = (f"envelope {env.violations}, cauchy {rep.cauchy_step:.1e}, closed-form {closed:.1e}, "
              f"residual {residual:.1e}, rate {rep.rate:.10f} [{''.join(k for k, v in checks.items() if v)}]")
    assert criterion(4, "doubling showcase (a)-(e)", all(checks.values()), detail)


def test_c05_halving_showcase(criterion, stabilized):
    cfg, f, grid, c = showcase("halving")
    rep = stabilized["halving"]
    p = c.p
    closed_bound = (c.beta + c.gamma / 2) * grid.norms**p / (2 ** (p - 1) - 1)
    within = bool(np.all(rep.distance <= closed_bound * (1 + 1e-12)))
    ok = within and abs(rep.rate - 0.5) <= 1e-6
    assert criterion(5, "halving showcase", ok, f"bound holds {within}, rate {rep.rate:.10f}")


def test_c06_uniqueness(criterion):
    vals = {}
    for name in SHOWCASES:
        cfg, f, grid, c = showcase(name)
        vals[name] = uniqueness_probe(f, grid, c, depth=40)
    ok = max(vals.values()) <= 1e-9
    assert criterion(6, "uniqueness probe at depth 40", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in vals.items()))


def test_c07_orbit_bound(criterion, stabilized):
    ok, details = True, []
    for name in SHOWCASES:
        cfg, f, grid, c = showcase(name)
        regime, L = regime_constants(c)
        psi = PsiFunction(c, grid.space)
        ftab = TabulatedMap.tabulate(f, grid)
        ttab = TabulatedMap(grid, stabilized[name].values, -grid.scale_depth, grid.scale_depth)
        lhs = gen_distance(ftab, ttab, psi)
        rhs = gen_distance(ftab, apply_J(ftab, regime), psi) / (1 - L)
        ok &= lhs <= rhs + 1e-9
        details.append(f"{name} {lhs:.12f} <= {rhs:.12f}")
    assert criterion(7, "orbit bound d(f,T) <= d(f,Jf)/(1-L)", ok, "; ".join(details))


def test_c08_unimodular_and_scalar_linearity(criterion):
    rng = np.random.default_rng(8)
    inner = np.sqrt(rng.uniform(0, 1, 1000)) * np.exp(2j * np.pi * rng.uniform(size=1000)) * 0.999999
    outer = 3 * np.sqrt(rng.uniform(0, 1, 1000)) * np.exp(2j * np.pi * rng.uniform(size=1000))
    worst = 0.0
    for z in np.concatenate([inner, outer]):
        mus = three_unimodular(z)
        worst = max(worst, abs(sum(mus) - z), *(abs(abs(m) - 1) for m in mus))
    chain = 0.0
    for name in SHOWCASES:
        cfg, f, grid, c = showcase(name)
        T = StabilizedMap(f, c.regime, cfg.run.depth)
        for b in range(len(grid.base_points)):
            x = grid.point((b, 0))
            for lam in (2 + 1j, -3.7, 0.01):
                chain = max(chain, scalar_linearity_check(T, lam, x)[0])
    ok = worst <= 1e-12 and chain <= 1e-8
    assert criterion(8, "three-unimodular split and scalar linearity", ok,
                     f"decomposition {worst:.1e}, chain {chain:.1e}")


def test_c09_p_equals_one(criterion, tmp_path, capsys):
    message = ""
    try:
        from_dict({"control": {"beta": 1.0, "p": 1.0}})
    except ValidationError as err:
        message = str(err)
    path = tmp_path / "p1.json"
    path.write_text('{"control": {"beta": 1.0, "p": 1.0}}')
    code = cli.main(["run", str(path)])
    capsys.readouterr()
    ok = message.startswith("p = 1 is not covered") and code == 2
    assert criterion(9, "p = 1 rejected", ok, f"exit {code}: {message}")


def test_c10_determinism(criterion, tmp_path):
    same = {}
    for fmt in ("csv", "json"):
        outs = []
        for i in range(2):
            path = tmp_path / f"run{i}.{fmt}"
            assert cli.main(["run", "doubling", "--seed", "3", "--format", fmt, "--out", str(path)]) == 0
            outs.append(path.read_bytes())
        same[fmt] = outs[0] == outs[1]
    assert criterion(10, "byte-identical repeated runs", all(same.values()),
                     ", ".join(f"{k} {'identical' if v else 'differs'}" for k, v in same.items()))
