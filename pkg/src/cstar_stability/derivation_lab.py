"""Exact derivations, perturbations and the combined defect functional.

A map under test is ``f = d + g`` where ``d`` is an exact derivation of the
module and ``g`` a perturbation with ``g(0) = 0``. The perturbation families
are chosen so the Hyers limit of ``f`` is known in closed form (it is ``d``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cstar_core import StabilityError, adjoint, as_algebra
from .module_space import ALGEBRA, VECTOR, ModuleSpace, SpaceMismatch

SKEW = "skew"
COMMUTATOR = "commutator"

NONE = "none"
POWER_LAW = "power_law"
COMPACT_SUPPORT = "compact_support"


class NotSkew(StabilityError):
    pass


class NotUnimodular(StabilityError):
    pass


def skew_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(adjoint(m) + m)))


def random_skew(k: int, seed: int) -> np.ndarray:
    """Seeded skew-adjoint matrix (A - A*)/2.

    Each real component of A is a sum of 12 uniforms minus 6, an
    approximately standard normal draw.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=(12, 2, k, k)).sum(axis=0) - 6.0
    a = u[0] + 1j * u[1]
    return 0.5 * (a - adjoint(a))


@dataclass(frozen=True, eq=False)
class Derivation:
    """``x -> D x`` on C^n (skew) or ``v -> u v - v u`` on M_k (commutator).

    Skew-adjointness of the generator is enforced unless ``checked=False``,
    which exists so negative controls can feed in non-derivations.
    """

    kind: str
    matrix: np.ndarray
    space: ModuleSpace
    checked: bool = True

    def __post_init__(self):
        m = as_algebra(self.matrix)
        object.__setattr__(self, "matrix", m)
        want = {SKEW: VECTOR, COMMUTATOR: ALGEBRA}.get(self.kind)
        if want is None:
            raise ValueError(f"unknown derivation kind {self.kind!r}")
        if self.space.kind != want or m.shape[0] != self.space.dim:
            raise SpaceMismatch(f"{self.kind} generator of size {m.shape[0]} does not fit {self.space}")
        if self.checked and skew_residual(m) > 1e-12:
            raise NotSkew(f"generator is not skew-adjoint (residual {skew_residual(m):.3e})")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self.space.check(x)
        if self.kind == SKEW:
            return x @ self.matrix.T
        return self.matrix @ x - x @ self.matrix


def derivation_residual(d, space: ModuleSpace, x, y, z) -> float:
    """Norm of d(<x,y>z) - <d x, y>z - <x, d y>z - <x,y> d z for any map d."""
    space.check(x, y, z)
    ip = space.inner
    lhs = d(space.act(ip(x, y), z))
    rhs = (
        space.act(ip(d(x), y), z)
        + space.act(ip(x, d(y)), z)
        + space.act(ip(x, y), d(z))
    )
    return float(space.norm(lhs - rhs))


@dataclass(frozen=True, eq=False)
class Perturbation:
    kind: str = NONE
    eps: float = 0.0
    p: float = 0.0
    radius: float = 1.0
    direction: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (NONE, POWER_LAW, COMPACT_SUPPORT):
            raise ValueError(f"unknown perturbation family {self.kind!r}")
        if self.eps < 0 or self.p < 0 or self.radius <= 0:
            raise ValueError("perturbation needs eps >= 0, p >= 0, radius > 0")

    def profile(self, r):
        """Scalar factor multiplying the direction, as a function of ||x||."""
        r = np.asarray(r, dtype=float)
        if self.kind == NONE or self.eps == 0.0:
            return np.zeros_like(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == POWER_LAW:
                out = self.eps * np.where(r > 0, r, 1.0) ** self.p
            else:
                out = self.eps * np.maximum(0.0, 1.0 - r / self.radius)
        return np.where(r > 0, out, 0.0)


@dataclass(frozen=True, eq=False)
class MapUnderTest:
    """f(x) = d(x) + g(x) with g(x) = profile(||x||) * e and f(0) = 0."""

    derivation: Derivation
    perturbation: Perturbation = field(default_factory=Perturbation)

    def __post_init__(self):
        pert = self.perturbation
        if pert.kind != NONE:
            e = pert.direction
            if e is None:
                e = self.space.basis(0)
            e = self.space.element(e)
            if abs(float(self.space.norm(e)) - 1.0) > 1e-12:
                raise ValueError("perturbation direction must have unit module norm")
            object.__setattr__(self, "_direction", e)

    @property
    def space(self) -> ModuleSpace:
        return self.derivation.space

    def perturb(self, x: np.ndarray) -> np.ndarray:
        if self.perturbation.kind == NONE:
            return np.zeros_like(np.asarray(x, dtype=complex))
        scale = self.perturbation.profile(self.space.norm(x))
        return np.asarray(scale)[(...,) + (None,) * len(self.space.shape)] * self._direction

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return self.derivation(x) + self.perturb(x)


def full_defect(f, mu: complex, x, y, u, v, w, space: ModuleSpace | None = None) -> float:
    """Norm of the combined stability expression

        f(mu x + y) - mu f(x) - f(y) + f(<u,v>w) - <f(u),v>w - <u,f(v)>w - <u,v>f(w)
    """
    space = space or f.space
    if abs(abs(mu) - 1.0) > 1e-12:
        raise NotUnimodular(f"|mu| = {abs(mu)!r} is not 1")
    space.check(x, y, u, v, w)
    ip, act = space.inner, space.act
    uv = ip(u, v)
    expr = (
        f(mu * x + y)
        - mu * f(x)
        - f(y)
        + f(act(uv, w))
        - act(ip(f(u), v), w)
        - act(ip(u, f(v)), w)
        - act(uv, f(w))
    )
    return float(space.norm(expr))


def mu_panel() -> list[complex]:
    """16 equally spaced unimodular points plus the exact values 1, -1, i, -i."""
    ring = [complex(np.cos(2 * np.pi * j / 16), np.sin(2 * np.pi * j / 16)) for j in range(16)]
    return ring + [1.0 + 0j, -1.0 + 0j, 1j, -1j]


@dataclass
class EnvelopeRow:
    mu: complex
    args: tuple  # grid labels (base, scale) or None for the zero element
    defect: float
    phi: float

    @property
    def margin(self) -> float:
        return self.phi - self.defect

    @property
    def violated(self) -> bool:
        return self.margin < -1e-10


@dataclass
class EnvelopeReport:
    rows: list[EnvelopeRow]

    @property
    def violations(self) -> int:
        return sum(r.violated for r in self.rows)

    @property
    def min_margin(self) -> float:
        return min((r.margin for r in self.rows), default=float("inf"))


def defect_envelope(
    f: MapUnderTest,
    control,
    grid,
    *,
    tuples: int = 200,
    seed: int = 0,
    product_radius: float = 1.0,
) -> EnvelopeReport:
    """Tabulate defect versus control on seeded tuples from the grid.

    ``x`` and ``y`` range over the whole grid. The product slots ``u, v, w``
    are either all zero or drawn from grid points of norm at most
    ``product_radius``: the terms <g(u),v>w grow faster than any admissible
    control, so the hypothesis can only be checked on a bounded region.
    """
    rng = np.random.default_rng(seed)
    space = f.space
    labels = grid.labels()
    small = [lab for lab in labels if grid.norm_at(lab) <= product_radius]
    panel = mu_panel()
    zero = space.zero()
    rows = []
    for t in range(tuples):
        mu = panel[int(rng.integers(len(panel)))]
        lx = labels[int(rng.integers(len(labels)))]
        ly = labels[int(rng.integers(len(labels)))]
        if t % 2 == 0 or not small:
            luvw = (None, None, None)
        else:
            luvw = tuple(small[int(rng.integers(len(small)))] for _ in range(3))
        args = (lx, ly) + luvw
        pts = [zero if lab is None else grid.point(lab) for lab in args]
        defect = full_defect(f, mu, *pts)
        phi = control.phi(space, *pts)
        rows.append(EnvelopeRow(mu, args, defect, phi))
    return EnvelopeReport(rows)


@dataclass
class Witness:
    u0: np.ndarray
    v: np.ndarray
    w: np.ndarray
    residual: float


def non_adjointable_witness(k: int = 2) -> Witness:
    """Inner derivation v -> u0 v - v u0 with u0 = 2i xi xi* that is not a module map.

    With v = e_12, w = e_21 one gets d(vw) = d(e_11) = 0 while v d(w) = -2i e_11,
    so ||d(vw) - v d(w)|| = 2.
    """
    if k < 2:
        raise ValueError("the witness needs k >= 2")
    space = ModuleSpace.matrices(k)
    xi = np.zeros(k, dtype=complex)
    xi[0] = 1.0
    u0 = 2j * np.outer(xi, np.conj(xi))
    d = Derivation(COMMUTATOR, u0, space)
    v = space.zero()
    v[0, 1] = 1.0
    w = space.zero()
    w[1, 0] = 1.0
    residual = float(space.norm(d(v @ w) - v @ d(w)))
    return Witness(u0, v, w, residual)
