"""Concrete Hilbert C*-module instances.

Two kinds are supported:

* ``vector``: C^n as a left module over the scalars (an inner product space),
  with ``<x, y> = sum x_i conj(y_i)`` returned as a 1x1 matrix.
* ``algebra``: M_k(C) as a module over itself, with ``<a, b> = a b*``.

Elements are numpy arrays of shape ``space.shape``. Most operations also
accept a stack of elements with extra leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cstar_core import (
    StabilityError,
    adjoint,
    hermitian_defect,
    min_eigenvalue,
    operator_norm,
    operator_norms,
)

VECTOR = "vector"
ALGEBRA = "algebra"
MAX_DIM = 16


class SpaceMismatch(StabilityError):
    pass


class ActionShapeMismatch(StabilityError):
    pass


@dataclass(frozen=True)
class ModuleSpace:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in (VECTOR, ALGEBRA):
            raise ValueError(f"unknown module kind {self.kind!r}")
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {self.dim}")

    @classmethod
    def vectors(cls, n: int) -> "ModuleSpace":
        return cls(VECTOR, n)

    @classmethod
    def matrices(cls, k: int) -> "ModuleSpace":
        return cls(ALGEBRA, k)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim,) if self.kind == VECTOR else (self.dim, self.dim)

    @property
    def algebra_dim(self) -> int:
        """Size k of the coefficient algebra M_k(C)."""
        return 1 if self.kind == VECTOR else self.dim

    def __str__(self):
        return f"C^{self.dim}" if self.kind == VECTOR else f"M_{self.dim}(C)"

    def zero(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def element(self, payload) -> np.ndarray:
        x = np.asarray(payload, dtype=complex)
        if x.shape != self.shape:
            raise SpaceMismatch(f"payload shape {x.shape} does not match {self} {self.shape}")
        return x

    def check(self, *xs: np.ndarray) -> None:
        nd = len(self.shape)
        for x in xs:
            if np.shape(x)[-nd:] != self.shape:
                raise SpaceMismatch(f"element of shape {np.shape(x)} is not in {self}")

    def basis(self, index: int) -> np.ndarray:
        """Unit-norm basis element: e_i for vectors, matrix unit e_(i//k, i%k)."""
        e = self.zero()
        e.reshape(-1)[index] = 1.0
        return e

    # --- module structure -------------------------------------------------

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """A-valued inner product, linear in the first slot."""
        self.check(x, y)
        if self.kind == VECTOR:
            s = np.sum(x * np.conj(y), axis=-1)
            return np.asarray(s)[..., None, None]
        return x @ adjoint(y)

    def act(self, a: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Left module action a . x."""
        a = np.asarray(a, dtype=complex)
        self.check(x)
        k = self.algebra_dim
        if a.shape[-2:] != (k, k):
            raise ActionShapeMismatch(
                f"cannot act on {self} with a {a.shape[-2:]} matrix"
            )
        if self.kind == VECTOR:
            return a[..., 0, 0][..., None] * x
        return a @ x

    def combine(self, lam: complex, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.check(x, y)
        return lam * x + y

    def norm(self, x: np.ndarray):
        """Module norm ||<x,x>||^(1/2); vectorized over leading axes."""
        self.check(x)
        if self.kind == VECTOR:
            # ||<x,x>|| for a 1x1 matrix is |sum |x_i|^2|
            return np.sqrt(np.sum(np.abs(x) ** 2, axis=-1))
        x = np.asarray(x)
        if x.ndim == 2:
            return np.sqrt(operator_norm(x @ adjoint(x)))
        return np.sqrt(operator_norms(x @ adjoint(x)))

    # --- sampling ---------------------------------------------------------

    def random_element(self, rng: np.random.Generator, size=()) -> np.ndarray:
        """Entries uniform in the complex unit disc."""
        lead = (size,) if isinstance(size, int) else tuple(size)
        shape = lead + self.shape
        r = np.sqrt(rng.uniform(size=shape))
        theta = rng.uniform(0.0, 2 * np.pi, size=shape)
        return r * np.exp(1j * theta)

    def random_algebra(self, rng: np.random.Generator) -> np.ndarray:
        k = self.algebra_dim
        r = np.sqrt(rng.uniform(size=(k, k)))
        theta = rng.uniform(0.0, 2 * np.pi, size=(k, k))
        return r * np.exp(1j * theta)


InnerProduct = Callable[[np.ndarray, np.ndarray], np.ndarray]


def transposed_inner(space: ModuleSpace) -> InnerProduct:
    """A broken pairing with the conjugation dropped; fails the involution axiom."""

    def inner(x, y):
        if space.kind == VECTOR:
            return np.asarray(np.sum(x * y, axis=-1))[..., None, None]
        return x @ np.swapaxes(y, -1, -2)

    return inner


@dataclass
class AxiomReport:
    space: str
    tuples: int
    tol: float
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    @property
    def failures(self) -> list[str]:
        return [name for name, r in self.residuals.items() if r > self.tol]


def verify_axioms(
    space: ModuleSpace,
    samples: Sequence[np.ndarray] | None = None,
    tol: float = 1e-10,
    *,
    tuples: int = 500,
    seed: int = 0,
    inner: InnerProduct | None = None,
) -> AxiomReport:
    """Check the pre-Hilbert module axioms on seeded tuples.

    Tuples (x, y, z, lambda, a) are formed from ``samples`` when given,
    otherwise from fresh unit-disc elements. Each residual is the maximum
    operator norm of the violated identity over all tuples.
    """
    rng = np.random.default_rng(seed)
    inner = inner or space.inner
    pool = None if samples is None else [space.element(s) for s in samples]

    def draw():
        if pool is None:
            return space.random_element(rng)
        return pool[int(rng.integers(len(pool)))]

    res = dict.fromkeys(
        ["positivity", "definiteness", "additivity", "module_linearity", "involution"], 0.0
    )
    zero = space.zero()
    res["definiteness"] = operator_norm(inner(zero, zero))
    for _ in range(tuples):
        x, y, z = draw(), draw(), draw()
        lam = complex(*rng.uniform(-1, 1, size=2))
        a = space.random_algebra(rng)

        xx = inner(x, x)
        herm = hermitian_defect(xx)
        neg = max(0.0, -min_eigenvalue(0.5 * (xx + adjoint(xx))))
        res["positivity"] = max(res["positivity"], herm, neg)
        if np.any(x != 0) and operator_norm(xx) == 0.0:
            res["definiteness"] = max(res["definiteness"], 1.0)

        lhs = inner(lam * x + y, z)
        res["additivity"] = max(
            res["additivity"], operator_norm(lhs - lam * inner(x, z) - inner(y, z))
        )
        res["module_linearity"] = max(
            res["module_linearity"],
            operator_norm(inner(space.act(a, x), y) - a @ inner(x, y)),
        )
        res["involution"] = max(
            res["involution"], operator_norm(adjoint(inner(x, y)) - inner(y, x))
        )
    return AxiomReport(str(space), tuples, tol, res)
