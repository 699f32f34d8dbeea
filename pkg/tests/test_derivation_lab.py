import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cstar_stability.control import ControlFunction
from cstar_stability.cstar_core import adjoint
from cstar_stability.derivation_lab import (
    COMMUTATOR,
    COMPACT_SUPPORT,
    POWER_LAW,
    SKEW,
    Derivation,
    MapUnderTest,
    NotSkew,
    NotUnimodular,
    Perturbation,
    defect_envelope,
    derivation_residual,
    full_defect,
    mu_panel,
    non_adjointable_witness,
    random_skew,
    skew_residual,
)
from cstar_stability.fixed_point import SampleGrid
from cstar_stability.module_space import ModuleSpace

C1 = ModuleSpace.vectors(1)
C2 = ModuleSpace.vectors(2)
M2 = ModuleSpace.matrices(2)
seeds = st.integers(0, 2**32 - 1)


def scalar_map(eps=0.1, p=0.5):
    d = Derivation(SKEW, np.array([[1j]]), C1)
    return MapUnderTest(d, Perturbation(POWER_LAW, eps, p, direction=np.array([1.0])))


def test_random_skew_is_skew_and_seeded():
    a = random_skew(4, 7)
    assert skew_residual(a) <= 1e-15
    assert np.array_equal(a, random_skew(4, 7))
    assert not np.array_equal(a, random_skew(4, 8))


def test_non_skew_generator_rejected():
    with pytest.raises(NotSkew):
        Derivation(SKEW, np.eye(2), C2)


def test_eval_map_examples():
    f = scalar_map()
    assert f(np.array([1.0])) == pytest.approx(np.array([1j + 0.1]), abs=1e-15)
    assert np.array_equal(f(C1.zero()), C1.zero())
    pure = MapUnderTest(Derivation(SKEW, random_skew(2, 3), C2))
    x = np.array([0.3 + 1j, -2.0])
    assert np.array_equal(pure(x), pure.derivation(x))


def test_derivation_residual_examples(rng):
    for _ in range(20):
        d = Derivation(COMMUTATOR, random_skew(2, int(rng.integers(1000))), M2)
        x, y, z = (M2.random_element(rng) for _ in range(3))
        assert derivation_residual(d, M2, x, y, z) <= 1e-12
        d = Derivation(SKEW, random_skew(3, int(rng.integers(1000))), ModuleSpace.vectors(3))
        x, y, z = (d.space.random_element(rng) for _ in range(3))
        assert derivation_residual(d, d.space, x, y, z) <= 1e-12
    ident = Derivation(SKEW, np.eye(1), C1, checked=False)
    one = np.array([1.0])
    assert derivation_residual(ident, C1, one, one, one) == pytest.approx(2.0, abs=1e-15)


@given(seeds, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_residual_linear_in_derivation(seed, lam):
    rng = np.random.default_rng(seed)
    a, b = random_skew(2, seed % 1000), random_skew(2, seed % 1000 + 1)
    lam = complex(lam.real, 0.0)  # real combinations of skew generators stay skew
    d = Derivation(COMMUTATOR, lam * a + b, M2)
    x, y, z = (M2.random_element(rng) for _ in range(3))
    assert derivation_residual(d, M2, x, y, z) <= 1e-10 * (1 + abs(lam))


def test_full_defect_examples():
    f = scalar_map()
    one, zero = np.array([1.0]), C1.zero()
    val = full_defect(f, 1, one, one, zero, zero, zero)
    assert val == pytest.approx(abs(0.1 * 2**0.5 - 0.2), abs=1e-15)
    assert val == pytest.approx(0.05858, abs=1e-5)
    with pytest.raises(NotUnimodular):
        full_defect(f, 1.5, one, one, zero, zero, zero)


@given(seeds)
def test_full_defect_reduces_to_doubling_gap(seed):
    rng = np.random.default_rng(seed)
    f = MapUnderTest(Derivation(SKEW, random_skew(2, 5), C2),
                     Perturbation(POWER_LAW, 0.1, 0.5))
    x, z = C2.random_element(rng) * 10, C2.zero()
    gap = float(C2.norm(f(2 * x) - 2 * f(x)))
    assert full_defect(f, 1, x, x, z, z, z) == pytest.approx(gap, abs=1e-13)


@given(seeds)
def test_exact_derivation_has_no_defect(seed):
    rng = np.random.default_rng(seed)
    f = MapUnderTest(Derivation(COMMUTATOR, random_skew(2, seed % 97), M2))
    args = [M2.random_element(rng) for _ in range(5)]
    for mu in mu_panel():
        assert full_defect(f, mu, *args) <= 1e-10


def test_mu_panel():
    panel = mu_panel()
    assert len(panel) == 20
    assert all(abs(abs(m) - 1) <= 1e-15 for m in panel)
    assert {1, -1, 1j, -1j} <= set(panel)


def test_envelope_examples():
    grid = SampleGrid.generate(C2, 6, 8, seed=2)
    d = Derivation(SKEW, random_skew(2, 7), C2)
    exact = defect_envelope(MapUnderTest(d), ControlFunction(beta=0.2, p=0.5), grid, tuples=100)
    assert exact.violations == 0
    assert all(r.margin == pytest.approx(r.phi, abs=1e-10) for r in exact.rows)

    f = MapUnderTest(d, Perturbation(POWER_LAW, 0.1, 0.5))
    ok = defect_envelope(f, ControlFunction(beta=0.2, p=0.5), grid, tuples=200)
    assert ok.violations == 0
    assert ok.min_margin >= 0

    bad = defect_envelope(f, ControlFunction(beta=0.01, p=0.5), grid, tuples=200)
    assert bad.violations > 0


def test_compact_support_profile():
    pert = Perturbation(COMPACT_SUPPORT, 0.5, radius=4.0)
    assert np.allclose(pert.profile([0.0, 1.0, 4.0, 10.0]), [0.0, 0.375, 0.0, 0.0])


def test_witness():
    for k in (2, 3):
        wit = non_adjointable_witness(k)
        assert wit.residual == pytest.approx(2.0, abs=1e-12)
        assert np.array_equal(adjoint(wit.u0) + wit.u0, np.zeros((k, k)))
    wit = non_adjointable_witness(2)
    d = Derivation(COMMUTATOR, wit.u0, M2)
    assert np.allclose(d(wit.v @ wit.w), 0)
    assert np.allclose(wit.v @ d(wit.w), -2j * np.diag([1, 0]))
