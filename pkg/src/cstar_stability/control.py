"""Control functions, the derived psi, contraction constants and error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cstar_core import StabilityError

RASSIAS = "rassias"
CONSTANT = "constant"

DOUBLING = "doubling"
HALVING = "halving"


class PEqualsOne(StabilityError):
    """The borderline exponent p = 1 admits no stability estimate of this kind."""

    def __init__(self, message: str | None = None):
        super().__init__(
            message
            or "p = 1 is not covered: the borderline exponent has no stability "
            "theorem (both contraction constants equal 1)"
        )


class AlphaNotAllowed(StabilityError):
    pass


def _pow(r, p: float):
    """||x||^p with a zero argument contributing 0 for every p >= 0."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, np.where(r > 0, r, 1.0) ** p, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ControlFunction:
    """phi(x,y,u,v,w) = alpha + beta * sum ||.||^p + gamma * prod ||.||^(p/2).

    ``CONSTANT`` is the Hyers case phi = alpha.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    p: float = 0.0
    family: str = RASSIAS

    def __post_init__(self):
        if self.family not in (RASSIAS, CONSTANT):
            raise ValueError(f"unknown control family {self.family!r}")
        for name in ("alpha", "beta", "gamma", "p"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val >= 0):
                raise ValueError(f"control parameter {name} must be finite and >= 0, got {val}")

    @classmethod
    def constant(cls, alpha: float) -> "ControlFunction":
        return cls(alpha=alpha, family=CONSTANT)

    def phi_of_norms(self, *norms) -> float:
        if self.family == CONSTANT:
            return float(self.alpha)
        powered = [_pow(r, self.p) for r in norms]
        halves = [_pow(r, self.p / 2) for r in norms]
        return float(self.alpha + self.beta * sum(powered) + self.gamma * math.prod(halves))

    def phi(self, space, x, y, u, v, w) -> float:
        norms = [float(space.norm(a)) for a in (x, y, u, v, w)]
        return self.phi_of_norms(*norms)

    def psi_of_norm(self, r):
        """psi as a function of ||x||.

        For the Rassias family this is alpha + (2^(1-p) beta + 2^(-p) gamma) ||x||^p.
        The gamma part dominates phi(x/2, x/2, 0, 0, 0), whose product term
        vanishes; it is kept because it scales exactly like the beta part.
        """
        r = np.asarray(r, dtype=float)
        if self.family == CONSTANT:
            out = np.full_like(r, self.alpha)
        else:
            coef = 2.0 ** (1 - self.p) * self.beta + 2.0 ** (-self.p) * self.gamma
            out = np.asarray(self.alpha + coef * _pow(r, self.p), dtype=float)
        return out if out.ndim else float(out)

    def psi(self, space, x) -> float:
        return float(self.psi_of_norm(space.norm(x)))

    @property
    def regime(self) -> str:
        return regime_constants(self).regime

    @property
    def lipschitz(self) -> float:
        return regime_constants(self).L


class Regime(NamedTuple):
    regime: str
    L: float


def regime_constants(c: ControlFunction) -> Regime:
    if c.family == CONSTANT:
        return Regime(DOUBLING, 0.5)
    if abs(c.p - 1.0) <= 1e-12:
        raise PEqualsOne()
    if c.p < 1:
        return Regime(DOUBLING, 2.0 ** (c.p - 1))
    if c.alpha > 0:
        raise AlphaNotAllowed(
            f"p = {c.p} > 1 needs alpha = 0: 2^n * alpha does not vanish under halving"
        )
    return Regime(HALVING, 2.0 ** (1 - c.p))


class PsiFunction:
    """psi bound to a module space; callable on single elements."""

    def __init__(self, control: ControlFunction, space):
        self.control = control
        self.space = space

    def __call__(self, x) -> float:
        return self.control.psi(self.space, x)

    def of_norm(self, r):
        return self.control.psi_of_norm(r)


def conclusion_bound(c: ControlFunction, space, x) -> float:
    """Guaranteed ||f(x) - T(x)|| bound: L/(1-L) psi (doubling) or psi/(1-L) (halving)."""
    return float(conclusion_bound_of_norm(c, space.norm(x)))


def conclusion_bound_of_norm(c: ControlFunction, r):
    regime, L = regime_constants(c)
    psi = c.psi_of_norm(r)
    if regime == DOUBLING:
        return L / (1 - L) * psi
    return psi / (1 - L)


def corollary_bound_of_norm(c: ControlFunction, r):
    """The same bound written in the closed form of the power-law corollaries."""
    regime, _ = regime_constants(c)
    if c.family == CONSTANT:
        return c.alpha + 0.0 * np.asarray(r, dtype=float)
    p = c.p
    rp = _pow(r, p)
    if regime == DOUBLING:
        return (c.alpha + c.beta * 2 ** (1 - p) * rp + c.gamma * 2 ** (-p) * rp) / (2 ** (1 - p) - 1)
    return (c.beta + c.gamma / 2) * rp / (2 ** (p - 1) - 1)


@dataclass
class AdmissibilityReport:
    regime: str
    L: float
    ratios: list[float]
    decaying: bool
    min_psi_slack: float
    psi_scaling_ok: bool

    @property
    def admissible(self) -> bool:
        return self.decaying and self.psi_scaling_ok


def _scaled_ratio(c: ControlFunction, regime: str, n: int, norm_tuples) -> float:
    s = 2.0**n if regime == DOUBLING else 2.0**-n
    best = 0.0
    for norms in norm_tuples:
        val = c.phi_of_norms(*(s * r for r in norms))
        best = max(best, val / 2.0**n if regime == DOUBLING else 2.0**n * val)
    return best


def check_admissibility(c: ControlFunction, grid, depth: int = 20) -> AdmissibilityReport:
    """Diagnose the two hypotheses that make the Hyers iteration contract.

    The vanishing-limit condition is sampled along n = 1..depth at
    ``(x, x, 0, 0, 0)`` and ``(x, y, u, v, w)`` tuples of grid norms; it is
    judged to hold when the scaled sequence is zero at the end or
    non-increasing over the second half and below its start. The psi scaling
    inequality is checked at every grid point with slack >= -1e-12 (relative).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    try:
        regime, L = regime_constants(c)
    except AlphaNotAllowed:
        # still diagnose it: the constant term makes 2^n phi(2^-n .) diverge
        regime, L = HALVING, 2.0 ** (1 - c.p)
    norms = sorted(set(float(r) for r in grid.all_norms()))
    base = [float(r) for r in grid.base_norms()]
    tuples = [(r, r, 0.0, 0.0, 0.0) for r in base]
    tuples += [tuple(base[(i + j) % len(base)] for j in range(5)) for i in range(len(base))]
    ratios = [_scaled_ratio(c, regime, n, tuples) for n in range(1, depth + 1)]
    half = ratios[len(ratios) // 2 :]
    decaying = ratios[-1] == 0.0 or (
        all(b <= a * (1 + 1e-12) for a, b in zip(half, half[1:])) and ratios[-1] < ratios[0]
    )
    min_slack = math.inf
    for r in norms:
        psi = c.psi_of_norm(r)
        if regime == DOUBLING:
            rhs = 2 * L * c.psi_of_norm(r / 2)
        else:
            rhs = 0.5 * L * c.psi_of_norm(2 * r)
        min_slack = min(min_slack, (rhs - psi) / (1.0 + psi))
    return AdmissibilityReport(regime, L, ratios, decaying, min_slack, min_slack >= -1e-12)


class GavrutaSum(NamedTuple):
    partial: float
    tail: float


def gavruta_tilde(c: ControlFunction, space, x, y, terms: int = 30) -> GavrutaSum:
    """Partial sum of 1/2 sum_n 2^-n phi(2^n x, 2^n y, 0, 0, 0) and its tail.

    The tail is exact for the doubling regime (a pair of geometric series)
    and infinite otherwise, where the series diverges.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    rx, ry = float(space.norm(x)), float(space.norm(y))
    partial = 0.0
    for n in range(terms):
        s = 2.0**n
        partial += 0.5 * c.phi_of_norms(s * rx, s * ry, 0.0, 0.0, 0.0) / s
    try:
        regime, _ = regime_constants(c)
    except StabilityError:
        regime = None
    if regime != DOUBLING:
        return GavrutaSum(partial, math.inf)
    if c.family == CONSTANT:
        return GavrutaSum(partial, c.alpha * 2.0**-terms)
    # sum_{n>=N} 2^-n (alpha + beta 2^{np} (rx^p + ry^p)), halved
    q = 2.0 ** (c.p - 1)
    b = c.beta * (_pow(rx, c.p) + _pow(ry, c.p))
    tail = 0.5 * (c.alpha * 2.0 ** (1 - terms) + b * q**terms / (1 - q))
    return GavrutaSum(partial, tail)
