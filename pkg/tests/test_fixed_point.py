import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cstar_stability.control import DOUBLING, HALVING, ControlFunction, PsiFunction
from cstar_stability.cstar_core import INFINITY
from cstar_stability.derivation_lab import POWER_LAW, SKEW, Derivation, MapUnderTest, Perturbation, random_skew
from cstar_stability.fixed_point import (
    DepthExhausted,
    GridMismatch,
    SampleGrid,
    TabulatedMap,
    apply_J,
    contraction_check,
    gen_distance,
    orbit_distances,
    random_tabulated,
)
from cstar_stability.module_space import ModuleSpace

C2 = ModuleSpace.vectors(2)
GRID = SampleGrid.generate(C2, 5, 8, seed=4)
PSI = PsiFunction(ControlFunction(beta=0.2, p=0.5), C2)
E = np.array([1.0, 0.0])
seeds = st.integers(0, 2**32 - 1)


def power_map(p):
    return lambda x: np.asarray(C2.norm(x))[..., None] ** p * E


def test_grid_geometry():
    assert GRID.points.shape == (5, 17, 2)
    assert np.allclose(GRID.base_norms(), [0.25, 1, 4, 0.25, 1])
    assert np.allclose(GRID.norms[:, 1:] / GRID.norms[:, :-1], 2.0)
    assert GRID.labels()[0] is None and len(GRID.labels()) == 1 + 5 * 17
    assert np.array_equal(GRID.point(None), C2.zero())


def test_distance_examples():
    g = TabulatedMap.tabulate(power_map(0.5), GRID)
    assert gen_distance(g, g, PSI) == 0
    h = TabulatedMap(GRID, g.values + PSI.of_norm(GRID.norms)[..., None] * E, g.lo, g.hi)
    assert gen_distance(g, h, PSI) == pytest.approx(1, abs=1e-12)
    table = PSI.of_norm(GRID.norms).copy()
    table[2, 3] = 0.0
    assert gen_distance(g, h, table) == INFINITY


def test_distance_grid_mismatch():
    other = SampleGrid.generate(C2, 5, 8, seed=4)
    with pytest.raises(GridMismatch):
        gen_distance(TabulatedMap.tabulate(power_map(0.5), GRID),
                     TabulatedMap.tabulate(power_map(0.5), other), PSI)


def test_apply_J_examples():
    ident = TabulatedMap.tabulate(lambda x: x, GRID)
    for regime in (DOUBLING, HALVING):
        j = apply_J(ident, regime)
        assert gen_distance(ident, j, PSI) == 0
        assert j.hi - j.lo == ident.hi - ident.lo - 1
    g = TabulatedMap.tabulate(power_map(0.3), GRID)
    jg = apply_J(g, DOUBLING)
    assert np.allclose(jg.values, 2 ** (0.3 - 1) * g.values[:, :-1], rtol=1e-13)


def test_apply_J_exhausts():
    g = TabulatedMap.tabulate(lambda x: x, GRID)
    for _ in range(GRID.width - 1):
        g = apply_J(g, DOUBLING)
    with pytest.raises(DepthExhausted):
        apply_J(g, DOUBLING)


@given(seeds)
def test_generalized_metric(seed):
    rng = np.random.default_rng(seed)
    g, h, k = (random_tabulated(GRID, rng, PSI) for _ in range(3))
    assert gen_distance(g, h, PSI) == gen_distance(h, g, PSI)
    assert gen_distance(g, k, PSI) <= gen_distance(g, h, PSI) + gen_distance(h, k, PSI) + 1e-12
    assert gen_distance(g, h, PSI) > 0


@pytest.mark.parametrize("p,regime", [(0.0, DOUBLING), (0.5, DOUBLING), (0.9, DOUBLING),
                                      (1.5, HALVING), (2.0, HALVING), (3.0, HALVING)])
def test_contraction(p, regime):
    c = ControlFunction(beta=1.0, p=p)
    assert c.regime == regime
    psi = PsiFunction(c, C2)
    rng = np.random.default_rng(int(p * 10))
    pairs = [(random_tabulated(GRID, rng, psi), random_tabulated(GRID, rng, psi)) for _ in range(30)]
    rep = contraction_check(pairs, psi, regime, c.lipschitz)
    assert rep.passed
    assert max(rep.ratios) <= c.lipschitz + 1e-12


def test_contraction_trivial_pairs(rng):
    g = random_tabulated(GRID, rng, PSI)
    assert contraction_check([(g, g)], PSI, DOUBLING, 2**-0.5).ratios == [0.0]


def test_orbit_of_exact_derivation_is_zero():
    d = Derivation(SKEW, random_skew(2, 1), C2)
    rep = orbit_distances(TabulatedMap.tabulate(d, GRID), PSI, DOUBLING, 10, 2**-0.5)
    assert rep.distances == [0.0] * 10
    assert rep.branch == "A2" and rep.n0 == 0


def test_orbit_geometric_for_power_law():
    f = MapUnderTest(Derivation(SKEW, random_skew(2, 1), C2), Perturbation(POWER_LAW, 0.1, 0.5))
    L = 2**-0.5
    rep = orbit_distances(TabulatedMap.tabulate(f, GRID), PSI, DOUBLING, 12, L)
    d = np.array(rep.distances)
    # d_0 = sup ||g(x) - g(2x)/2|| / psi(x) = 0.1 (1 - 2^{-1/2}) / (0.2 * 2^{1/2})
    assert d[0] == pytest.approx(0.1 * (1 - L) / (0.2 * 2**0.5), rel=1e-10)
    assert np.allclose(d[1:] / d[:-1], L, rtol=1e-10)
    assert rep.contraction_ok


def test_orbit_a1_with_vanishing_psi():
    f = TabulatedMap.tabulate(power_map(0.5), GRID)
    rep = orbit_distances(f, np.zeros_like(GRID.norms), DOUBLING, 4)
    assert all(math.isinf(d) for d in rep.distances)
    assert rep.branch == "A1" and rep.n0 is None


def test_orbit_too_many_steps():
    with pytest.raises(DepthExhausted):
        orbit_distances(TabulatedMap.tabulate(power_map(0.5), GRID), PSI, DOUBLING, GRID.width)


def test_fixed_points_of_J_are_homogeneous():
    f = TabulatedMap.tabulate(lambda x: 3j * x, GRID)
    jf = apply_J(f, DOUBLING)
    assert np.max(np.abs(jf.values - f.values[:, :-1])) <= 1e-12
