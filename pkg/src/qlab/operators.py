"""Dense operator algebra on a finite-dimensional Hilbert space.

States are 1-D complex arrays of length ``dim``; operators are ``dim x dim``
complex arrays. Validation helpers check the structural invariants
(Hermiticity, idempotency, positivity) at fixed tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
STRUCT_TOL = 1e-10


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def check_same_dim(a: np.ndarray, b: np.ndarray) -> int:
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a.shape[0]


def is_hermitian(x: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    return bool(np.max(np.abs(x - x.conj().T), initial=0.0) <= tol)


def check_hermitian(x: np.ndarray, tol: float = STRUCT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if not is_hermitian(x, tol):
        raise NotHermitianError("operator is not Hermitian within tolerance")
    return x


def normalize(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return vec / norm


def check_state(vec, tol: float = NORM_TOL) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim != 1:
        raise DimensionError("a pure state must be a 1-D amplitude vector")
    if abs(np.linalg.norm(vec) - 1.0) > tol:
        raise ValueError("state is not normalized")
    return vec


def projector(vec) -> np.ndarray:
    """|v><v| for a (not necessarily normalized) ket."""
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def is_projector(x: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    """Rank-1 projector test: idempotent with unit trace."""
    x = np.asarray(x)
    if not is_hermitian(x, tol):
        return False
    return bool(np.max(np.abs(x @ x - x)) <= tol and abs(np.trace(x) - 1) <= tol)


def is_density_operator(x: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    x = np.asarray(x)
    if not is_hermitian(x, tol):
        return False
    return bool(spectrum(x)[-1] >= -tol and abs(np.trace(x) - 1) <= tol)


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(a^dagger b) of two Hermitian operators."""
    check_same_dim(np.asarray(a), np.asarray(b))
    return float(np.vdot(a, b).real)


def spectrum(x: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian operator in descending order."""
    return np.linalg.eigvalsh(check_hermitian(x))[::-1]


def top_eigenpair(x: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest eigenvalue with a unit eigenvector.

    For a degenerate top eigenvalue the vector is the last column returned
    by the LAPACK solver, so the choice is deterministic.
    """
    vals, vecs = np.linalg.eigh(check_hermitian(x))
    return float(vals[-1]), vecs[:, -1]


def largest_eigenvalue(x: np.ndarray) -> float:
    return float(spectrum(x)[0])


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def operator_norm(x: np.ndarray) -> float:
    return float(np.linalg.norm(x, ord=2))


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthogonal Hermitian basis of the dim x dim operators (symmetrized matrix units)."""
    basis = []
    for k in range(dim):
        for l in range(k, dim):
            e = np.zeros((dim, dim), dtype=complex)
            if k == l:
                e[k, k] = 1
                basis.append(e)
                continue
            e[k, l] = e[l, k] = 1
            basis.append(e)
            f = np.zeros((dim, dim), dtype=complex)
            f[k, l], f[l, k] = 1j, -1j
            basis.append(f)
    return np.array(basis)


# -- random sampling ---------------------------------------------------------

def make_rng(seed=None) -> np.random.Generator:
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def haar_random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be positive")
    return normalize(_ginibre(rng, dim))


def haar_random_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Stack of ``count`` Haar-distributed unitaries, shape (count, dim, dim).

    QR of a Ginibre matrix, with the columns of Q rephased by the phases of
    R's diagonal; without that correction the distribution is not Haar.
    """
    z = _ginibre(rng, count, dim, dim)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (diag / np.abs(diag))[:, None, :]


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return haar_random_unitaries(dim, 1, rng)[0]


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = _ginibre(rng, dim, dim)
    return (z + z.conj().T) / 2


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density operator; rank 1 gives a Haar-random pure state."""
    z = _ginibre(rng, dim, rank or dim)
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


# -- measurements ------------------------------------------------------------

@dataclass(frozen=True)
class Povm:
    """A measurement given by its positive elements, shape (n_outcomes, dim, dim)."""

    elements: np.ndarray

    def __post_init__(self):
        el = np.asarray(self.elements, dtype=complex)
        if el.ndim != 3 or el.shape[1] != el.shape[2]:
            raise DimensionError("POVM elements must have shape (n, dim, dim)")
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.n_outcomes

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def from_rank_one(cls, weights, directions) -> "Povm":
        """Elements g_b |phi_b><phi_b| from weights and (normalized) directions."""
        weights = np.asarray(weights, dtype=float)
        directions = np.asarray(directions, dtype=complex)
        directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
        if np.any(weights < 0):
            raise ValueError("rank-1 POVM weights must be nonnegative")
        el = weights[:, None, None] * np.einsum("bk,bl->bkl", directions, directions.conj())
        return cls(el)

    @classmethod
    def from_columns(cls, w: np.ndarray) -> "Povm":
        """Rank-1 POVM {w_b w_b^dagger} from the columns of a co-isometry (W W^dagger = I)."""
        return cls(np.einsum("kb,lb->bkl", w, w.conj()))

    def rank_one_decomposition(self, tol: float = STRUCT_TOL) -> tuple[np.ndarray, np.ndarray]:
        """Weights g_b and unit directions phi_b; raises if an element is not rank 1.

        Zero elements get weight 0 and a zero direction.
        """
        weights = np.zeros(self.n_outcomes)
        directions = np.zeros((self.n_outcomes, self.dim), dtype=complex)
        for b, el in enumerate(self.elements):
            vals, vecs = np.linalg.eigh(check_hermitian(el))
            if vals[-1] <= tol:
                continue
            if vals[-2:-1].size and abs(vals[-2]) > tol * max(1.0, vals[-1]):
                raise ValueError(f"POVM element {b} is not rank 1")
            weights[b] = vals[-1]
            directions[b] = vecs[:, -1]
        return weights, directions


@dataclass(frozen=True)
class PovmValidation:
    positivity_margin: float
    completeness_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.positivity_margin >= -self.tol and self.completeness_residual <= self.tol

    def __bool__(self):
        return self.passed


def validate_povm(p: Povm, tol: float = STRUCT_TOL) -> PovmValidation:
    el = p.elements
    adj = np.conj(np.swapaxes(el, 1, 2))
    margin = np.linalg.eigvalsh((el + adj) / 2).min()
    # a non-Hermitian element counts as a positivity failure of its size
    skew = np.max(np.abs(el - adj), initial=0.0)
    if skew > tol:
        margin = min(margin, -skew)
    residual = operator_norm(el.sum(axis=0) - np.eye(p.dim))
    return PovmValidation(float(margin), residual, tol)


def polar_coisometry(v: np.ndarray) -> np.ndarray:
    """A^{-1/2} V with A = V V^dagger, computed through the thin SVD."""
    u, _, vh = np.linalg.svd(v, full_matrices=False)
    return u @ vh


def random_rank_one_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> Povm:
    """Random rank-1 POVM with ``n_outcomes >= dim`` elements."""
    if n_outcomes < dim:
        raise ValueError("a complete rank-1 POVM needs at least dim outcomes")
    return Povm.from_columns(polar_coisometry(_ginibre(rng, dim, n_outcomes)))


def haar_random_von_neumann(dim: int, rng: np.random.Generator) -> Povm:
    """Complete projective measurement in a Haar-random orthonormal basis."""
    return Povm.from_columns(haar_random_unitary(dim, rng))
