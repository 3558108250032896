"""SIC ensembles from Weyl-Heisenberg orbits, complete sets of MUBs, and the
depolarizing-type map they share.

Both structures give the same ensemble map

    Phi(X) = ((tr X) I + X) / (d (d + 1)),

which is what makes their accessible fidelity equal 2/(d+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ensembles import Ensemble, ensemble_map_of, maps_equal
from .operators import (
    STRUCT_TOL,
    DimensionError,
    check_state,
    is_density_operator,
    operator_norm,
)

SIC_TOL = 1e-9


class WeylHeisenbergIndex(NamedTuple):
    dim: int
    shift: int
    boost: int

    @classmethod
    def make(cls, dim: int, shift: int, boost: int) -> "WeylHeisenbergIndex":
        if dim < 1:
            raise ValueError("dim must be positive")
        return cls(dim, shift % dim, boost % dim)


def wh_displacement(idx: WeylHeisenbergIndex) -> np.ndarray:
    """X^shift Z^boost with X|k> = |k+1 mod d> and Z|k> = exp(2 pi i k/d)|k>."""
    d, a, b = idx
    if not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"index {idx} out of range")
    k = np.arange(d)
    out = np.zeros((d, d), dtype=complex)
    out[(k + a) % d, k] = np.exp(2j * np.pi * b * k / d)
    return out


def wh_displacements(dim: int) -> np.ndarray:
    """All d^2 displacements, ordered by shift then boost; shape (d^2, d, d)."""
    return np.array([wh_displacement(WeylHeisenbergIndex(dim, a, b))
                     for a in range(dim) for b in range(dim)])


def wh_orbit(fiducial) -> np.ndarray:
    fiducial = np.asarray(fiducial, dtype=complex)
    return wh_displacements(len(fiducial)) @ fiducial


def overlap_matrix(kets: np.ndarray) -> np.ndarray:
    """|<psi_i|psi_j>|^2, which is also the Gram matrix of the projectors."""
    return np.abs(kets.conj() @ kets.T) ** 2


def max_sic_deviation(kets: np.ndarray) -> float:
    d = kets.shape[1]
    if len(kets) < 2:
        return 0.0
    ov = overlap_matrix(kets)
    off = ~np.eye(len(kets), dtype=bool)
    return float(np.max(np.abs(ov[off] - 1 / (d + 1))))


@dataclass(frozen=True)
class SicEnsemble:
    ensemble: Ensemble
    fiducial: np.ndarray
    overlap_residual: float

    @property
    def dim(self) -> int:
        return self.ensemble.dim

    @property
    def kets(self) -> np.ndarray:
        return self.ensemble.kets

    @property
    def certified(self) -> bool:
        return self.overlap_residual < SIC_TOL


def sic_from_fiducial(fiducial) -> SicEnsemble:
    """Weyl-Heisenberg orbit of ``fiducial`` as a uniform ensemble.

    No SIC property is required here; the overlap residual records how far
    the orbit is from one.
    """
    fiducial = check_state(fiducial)
    kets = wh_orbit(fiducial)
    return SicEnsemble(Ensemble.uniform(kets), fiducial, max_sic_deviation(kets))


# -- the shared ensemble map ---------------------------------------------------

def phi_closed_form(dim: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (dim, dim):
        raise DimensionError(f"operator shape {x.shape} does not match dim {dim}")
    return (np.trace(x) * np.eye(dim) + x) / (dim * (dim + 1))


@dataclass(frozen=True)
class PhiMap:
    dim: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        return phi_closed_form(self.dim, x)

    __call__ = apply


def depolarizing_consistency(dim: int, rho: np.ndarray) -> float:
    """||Phi(rho) - Delta(rho)/d|| for the depolarizing channel with lambda = 1/(d+1)."""
    rho = np.asarray(rho, dtype=complex)
    if not is_density_operator(rho):
        raise ValueError("rho is not a density operator")
    lam = 1 / (dim + 1)
    depolarized = lam * rho + (1 - lam) * np.eye(dim) / dim
    return operator_norm(phi_closed_form(dim, rho) - depolarized / dim)


@dataclass(frozen=True)
class SicCertificate:
    dim: int
    overlap_residual: float
    gram_rank: int
    map_residual: float
    map_equal: bool

    @property
    def passed(self) -> bool:
        return self.overlap_residual < SIC_TOL and self.gram_rank == self.dim ** 2

    def __bool__(self):
        return self.passed


def verify_sic(s: SicEnsemble) -> SicCertificate:
    """Independent certificate: pairwise overlaps, Gram rank, and map identity."""
    kets = s.kets
    d = s.dim
    residual = max_sic_deviation(kets)
    rank = int(np.linalg.matrix_rank(overlap_matrix(kets)))
    cmp = maps_equal(ensemble_map_of(s.ensemble), PhiMap(d))
    return SicCertificate(d, residual, rank, cmp.residual, cmp.equal)


# -- informational completeness ------------------------------------------------

def _require_certified(s: SicEnsemble):
    if not s.certified:
        raise ValueError(f"SIC is not certified (overlap residual {s.overlap_residual:.3g})")


def sic_probabilities(s: SicEnsemble, rho: np.ndarray) -> np.ndarray:
    """Outcome probabilities tr(rho Pi_i)/d of the SIC-POVM {Pi_i/d}."""
    _require_certified(s)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (s.dim, s.dim):
        raise DimensionError("density operator has the wrong dimension")
    return np.einsum("ik,kl,il->i", s.kets.conj(), rho, s.kets).real / s.dim


def check_sic_probabilities(dim: int, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (dim * dim,):
        raise DimensionError(f"expected {dim * dim} probabilities, got {p.shape}")
    if abs(p.sum() - 1) > 1e-12:
        raise ValueError("probabilities do not sum to 1")
    if np.any(p < -STRUCT_TOL) or np.any(p > 1 / dim + STRUCT_TOL):
        raise ValueError("SIC probabilities must lie in [0, 1/d]")
    return p


def reconstruct_density(s: SicEnsemble, p) -> np.ndarray:
    """rho = (d+1) sum_i p(i) Pi_i - I."""
    _require_certified(s)
    d = s.dim
    p = check_sic_probabilities(d, p)
    rho = (d + 1) * np.einsum("i,ik,il->kl", p, s.kets, s.kets.conj()) - np.eye(d)
    if not is_density_operator(rho, tol=1e-8):
        raise ValueError("probabilities are inconsistent with any density operator")
    return rho


def purity_from_probabilities(dim: int, p) -> float:
    p = np.asarray(p, dtype=float)
    return float(dim * (dim + 1) * np.sum(p * p) - 1)


# -- mutually unbiased bases ---------------------------------------------------

def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n ** 0.5) + 1))


@dataclass(frozen=True)
class MubCollection:
    """d+1 orthonormal bases; ``bases[j, m]`` is the m-th vector of basis j."""

    bases: np.ndarray

    @property
    def dim(self) -> int:
        return self.bases.shape[2]

    @property
    def kets(self) -> np.ndarray:
        return self.bases.reshape(-1, self.dim)


def mub_construct(dim: int) -> MubCollection:
    if not is_prime(dim):
        raise ValueError(
            f"complete MUB construction is only implemented for prime d (got {dim}); "
            "complete sets are known for prime powers but not for general d such as 6")
    d = dim
    if d == 2:
        s = 1 / np.sqrt(2)
        bases = np.array([
            [[1, 0], [0, 1]],
            [[s, s], [s, -s]],
            [[s, 1j * s], [s, -1j * s]],
        ], dtype=complex)
        return MubCollection(bases)
    k = np.arange(d)
    bases = [np.eye(d, dtype=complex)]
    for j in range(d):
        basis = [np.exp(2j * np.pi * ((j * k * k + m * k) % d) / d) / np.sqrt(d) for m in range(d)]
        bases.append(np.array(basis))
    return MubCollection(np.array(bases))


class MubResiduals(NamedTuple):
    intra: float
    inter: float


def mub_residuals(m: MubCollection) -> MubResiduals:
    """Worst deviations from orthonormality within bases and from 1/d across bases."""
    d = m.dim
    n = len(m.bases)
    ov = overlap_matrix(m.kets).reshape(n, d, n, d)
    intra = max(np.max(np.abs(ov[j, :, j, :] - np.eye(d))) for j in range(n))
    inter = max((np.max(np.abs(ov[j, :, l, :] - 1 / d))
                 for j in range(n) for l in range(n) if j != l), default=0.0)
    return MubResiduals(float(intra), float(inter))


def mub_ensemble(m: MubCollection) -> Ensemble:
    return Ensemble.uniform(m.kets)


# -- uniqueness of the d^2-term decomposition ----------------------------------

@dataclass(frozen=True)
class UniquenessReport:
    dim: int
    n_states: int
    spans: bool
    map_equal: bool
    map_residual: float
    fitted_weights: np.ndarray | None = None
    weight_residual: float | None = None
    overlap_residual: float | None = None

    @property
    def impossible(self) -> bool:
        """Too few or linearly dependent states: Phi cannot be reproduced."""
        return not self.spans

    @property
    def is_sic(self) -> bool | None:
        """Whether the forced conclusion holds; None when the map differs from Phi."""
        if not self.map_equal:
            return None
        return self.weight_residual < SIC_TOL and self.overlap_residual < SIC_TOL


def sic_uniqueness_check(candidate: Ensemble) -> UniquenessReport:
    """Test whether an ensemble of at most d^2 states reproduces Phi.

    Phi has full rank on the d^2-dimensional operator space, so fewer than
    d^2 states (or dependent ones) can never give it. When the map does match,
    the weights are also recovered from the states alone by least squares on
    the superoperator, and both weights and overlaps are checked against the
    SIC values.
    """
    d = candidate.dim
    n = candidate.size
    if n > d * d:
        raise ValueError(f"candidate has {n} > d^2 = {d * d} states")
    gram = overlap_matrix(candidate.kets)
    spans = n == d * d and int(np.linalg.matrix_rank(gram)) == d * d
    cmp = maps_equal(ensemble_map_of(candidate), PhiMap(d))
    if not spans or not cmp.equal:
        return UniquenessReport(d, n, spans, cmp.equal and spans, cmp.residual)

    projs = candidate.projectors
    # row-major vec: vec(P X P) = (P kron P^T) vec(X)
    columns = np.array([np.kron(p, p.T).ravel() for p in projs]).T
    eye = np.eye(d).ravel()
    target = (np.outer(eye, eye) + np.eye(d * d)).ravel() / (d * (d + 1))
    fitted, *_ = np.linalg.lstsq(columns, target.astype(complex), rcond=None)
    fitted = fitted.real
    weight_residual = float(max(np.max(np.abs(fitted - 1 / d ** 2)),
                                np.max(np.abs(candidate.probs - 1 / d ** 2))))
    return UniquenessReport(d, n, True, True, cmp.residual, fitted, weight_residual,
                            max_sic_deviation(candidate.kets))
