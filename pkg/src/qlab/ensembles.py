"""Signal ensembles, ensemble maps and the intercept-resend fidelities.

An ensemble is a list of pure signal states |psi_i> sent with prior
probabilities pi_i. Its ensemble map is X -> sum_i pi_i Pi_i X Pi_i with
Pi_i = |psi_i><psi_i|. For a measurement {E_b} and resend states sigma_b the
eavesdropper's average fidelity is

    sum_{b,i} pi_i tr(Pi_i E_b) tr(Pi_i sigma_b),

and the best resend strategy for fixed {E_b} gives sum_b lambda_1(Psi(E_b)).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple, Protocol

import numpy as np

from .operators import (
    NORM_TOL,
    STRUCT_TOL,
    DimensionError,
    Povm,
    hermitian_basis,
    is_density_operator,
    operator_norm,
    random_hermitian,
    top_eigenpair,
)

PROB_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Ensemble:
    """Pure-state signal ensemble.

    ``kets`` has shape (n_states, dim); row i is |psi_i>. Repeated states are
    allowed and kept as separate entries.
    """

    kets: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        kets = np.array(self.kets, dtype=complex, ndmin=2)
        probs = np.array(self.probs, dtype=float, ndmin=1)
        if kets.ndim != 2:
            raise DimensionError("kets must be a 2-D array (n_states, dim)")
        if len(kets) != len(probs):
            raise ValueError(f"{len(kets)} states but {len(probs)} probabilities")
        if len(kets) == 0:
            raise ValueError("an ensemble needs at least one state")
        if np.any(np.abs(np.linalg.norm(kets, axis=1) - 1) > NORM_TOL):
            raise ValueError("ensemble states must be normalized")
        if np.any(probs < 0) or abs(probs.sum() - 1) > PROB_TOL:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "kets", _frozen(kets))
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def uniform(cls, kets) -> "Ensemble":
        kets = np.asarray(kets, dtype=complex)
        return cls(kets, np.full(len(kets), 1 / len(kets)))

    @property
    def dim(self) -> int:
        return self.kets.shape[1]

    @property
    def size(self) -> int:
        return self.kets.shape[0]

    def __len__(self):
        return self.size

    @property
    def projectors(self) -> np.ndarray:
        return np.einsum("ik,il->ikl", self.kets, self.kets.conj())


class LinearMap(Protocol):
    dim: int

    def apply(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class EnsembleMap:
    """X -> sum_i w_i |v_i><v_i| X |v_i><v_i| for unit vectors v_i."""

    weights: np.ndarray
    kets: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float, ndmin=1)
        kets = np.array(self.kets, dtype=complex, ndmin=2)
        if len(weights) != len(kets):
            raise ValueError("one weight per term is required")
        if np.any(weights < 0):
            raise ValueError("ensemble-map weights must be nonnegative")
        object.__setattr__(self, "weights", _frozen(weights))
        object.__setattr__(self, "kets", _frozen(kets))

    @property
    def dim(self) -> int:
        return self.kets.shape[1]

    @property
    def terms(self) -> list[tuple[float, np.ndarray]]:
        return [(float(w), np.outer(v, v.conj())) for w, v in zip(self.weights, self.kets)]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply_ensemble_map(self, x)

    __call__ = apply


def ensemble_map_of(p: Ensemble) -> EnsembleMap:
    return EnsembleMap(p.probs, p.kets)


def apply_ensemble_map(m: EnsembleMap, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (m.dim, m.dim):
        raise DimensionError(f"operator shape {x.shape} does not match map dimension {m.dim}")
    # Pi X Pi = <v|X|v> |v><v|
    sandwich = np.einsum("ik,kl,il->i", m.kets.conj(), x, m.kets)
    return np.einsum("i,ik,il->kl", m.weights * sandwich, m.kets, m.kets.conj())


def _apply_batch(m: EnsembleMap, xs: np.ndarray) -> np.ndarray:
    sandwich = np.einsum("ik,bkl,il->bi", m.kets.conj(), xs, m.kets)
    return np.einsum("bi,ik,il->bkl", sandwich * m.weights, m.kets, m.kets.conj())


@dataclass(frozen=True)
class ReconstructionStrategy:
    """Resend state for each measurement outcome, shape (n_outcomes, dim, dim)."""

    outputs: np.ndarray

    def __post_init__(self):
        out = np.array(self.outputs, dtype=complex, ndmin=3)
        for b, sigma in enumerate(out):
            if not is_density_operator(sigma):
                raise ValueError(f"resend state {b} is not a density operator")
        object.__setattr__(self, "outputs", _frozen(out))

    def __len__(self):
        return len(self.outputs)

    @classmethod
    def from_kets(cls, kets) -> "ReconstructionStrategy":
        kets = np.asarray(kets, dtype=complex)
        return cls(np.einsum("bk,bl->bkl", kets, kets.conj()))


class Method(str, enum.Enum):
    FORMULA = "formula"
    OPTIMIZER = "optimizer"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class FidelityReport:
    value: float
    method: Method
    stderr: float | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not -1e-12 <= self.value <= 1 + 1e-9:
            raise ValueError(f"fidelity {self.value} outside [0, 1]")
        if (self.stderr is not None) != (self.method is Method.MONTE_CARLO):
            raise ValueError("stderr is required for, and only for, Monte Carlo estimates")
        if self.stderr is not None and self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    def __float__(self):
        return float(self.value)

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "method": self.method.value, "stderr": self.stderr,
                "meta": self.meta}


def _check_povm(p: Ensemble, e: Povm):
    if e.dim != p.dim:
        raise DimensionError(f"POVM dimension {e.dim} does not match ensemble dimension {p.dim}")


def average_fidelity(p: Ensemble, e: Povm, m: ReconstructionStrategy) -> FidelityReport:
    _check_povm(p, e)
    if len(m) != e.n_outcomes:
        raise ValueError(f"{e.n_outcomes} outcomes but {len(m)} resend states")
    if m.outputs.shape[1] != p.dim:
        raise DimensionError("resend states have the wrong dimension")
    detect = np.einsum("ik,bkl,il->bi", p.kets.conj(), e.elements, p.kets).real
    resend = np.einsum("ik,bkl,il->bi", p.kets.conj(), m.outputs, p.kets).real
    value = float(np.sum(p.probs * detect * resend))
    return FidelityReport(value, Method.FORMULA, meta={"quantity": "average_fidelity"})


def _mapped_elements(p: Ensemble, e: Povm) -> np.ndarray:
    _check_povm(p, e)
    return _apply_batch(ensemble_map_of(p), e.elements)


def achievable_fidelity(p: Ensemble, e: Povm) -> FidelityReport:
    """sum_b lambda_1(Psi(E_b)): the best average fidelity for a fixed measurement."""
    mapped = _mapped_elements(p, e)
    value = float(np.linalg.eigvalsh(mapped)[:, -1].sum())
    return FidelityReport(value, Method.FORMULA, meta={"quantity": "achievable_fidelity"})


def optimal_reconstruction(p: Ensemble, e: Povm) -> ReconstructionStrategy:
    """Resend the top eigenvector of Psi(E_b) on outcome b."""
    kets = [top_eigenpair(x)[1] for x in _mapped_elements(p, e)]
    return ReconstructionStrategy.from_kets(kets)


def projective_reproduction(e: Povm) -> ReconstructionStrategy:
    """Resend the normalized direction of each rank-1 POVM element.

    A zero element has no direction to resend and is rejected.
    """
    weights, directions = e.rank_one_decomposition()
    if np.any(weights <= 0):
        raise ValueError("zero POVM element has no resend direction")
    return ReconstructionStrategy.from_kets(directions)


class MapComparison(NamedTuple):
    equal: bool
    residual: float


def maps_equal(a: LinearMap | Callable, b: LinearMap | Callable, n_probes: int = 10,
               rng: np.random.Generator | None = None, dim: int | None = None,
               tol: float = STRUCT_TOL) -> MapComparison:
    """Compare two linear maps on a Hermitian operator basis plus random probes.

    The residual is the largest operator-norm difference over all inputs;
    the maps are equal iff it is below ``tol``.
    """
    dims = {getattr(f, "dim", None) for f in (a, b)} - {None}
    if dim is not None:
        dims.add(dim)
    if len(dims) != 1:
        raise DimensionError(f"maps act on different dimensions: {sorted(dims)}")
    (dim,) = dims
    fa = a.apply if hasattr(a, "apply") else a
    fb = b.apply if hasattr(b, "apply") else b
    rng = rng if rng is not None else np.random.default_rng(0)
    inputs = list(hermitian_basis(dim)) + [random_hermitian(dim, rng) for _ in range(n_probes)]
    residual = max(operator_norm(fa(x) - fb(x)) for x in inputs)
    return MapComparison(residual < tol, residual)
