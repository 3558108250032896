"""Product ensembles on H_{d1} x H_{d2} and the gap between the best
product-signal fidelity (2/(d1+1))(2/(d2+1)) and the composite quantumness
2/(d1 d2 + 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensembles import Ensemble, achievable_fidelity
from .operators import Povm, random_rank_one_povm, tensor
from .optimization import (
    FiducialSearchConfig,
    PovmSearchConfig,
    accessible_fidelity_search,
    child_rng,
    find_fiducial,
)

SCHMIDT_TOL = 1e-10


class SicSearchError(RuntimeError):
    def __init__(self, dim: int, potential: float):
        super().__init__(f"no SIC fiducial found in d={dim} (best potential {potential:.3g})")
        self.dim = dim
        self.potential = potential


@dataclass(frozen=True)
class ProductEnsemble:
    left: Ensemble
    right: Ensemble
    joint: Ensemble


def product_ensemble(a: Ensemble, b: Ensemble) -> ProductEnsemble:
    """All |psi_i> x |chi_j> with probabilities pi_i rho_j (i major)."""
    kets = np.einsum("ik,jl->ijkl", a.kets, b.kets).reshape(a.size * b.size, a.dim * b.dim)
    probs = np.outer(a.probs, b.probs).ravel()
    return ProductEnsemble(a, b, Ensemble(kets, probs))


def composite_quantumness(d1: int, d2: int) -> float:
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    return 2 / (d1 * d2 + 1)


def product_fidelity_value(d1: int, d2: int) -> float:
    """Smallest accessible fidelity reachable with product-state signals."""
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be positive")
    return (2 / (d1 + 1)) * (2 / (d2 + 1))


def schmidt_coefficients(ket: np.ndarray, d1: int, d2: int) -> np.ndarray:
    return np.linalg.svd(np.asarray(ket).reshape(d1, d2), compute_uv=False)


def is_entangled(ket: np.ndarray, d1: int, d2: int, tol: float = SCHMIDT_TOL) -> bool:
    s = schmidt_coefficients(ket, d1, d2)
    return len(s) > 1 and s[1] > tol


def sic_ensemble(dim: int, seed: int = 0, **search) -> Ensemble:
    """SIC ensemble found by fiducial search; d=1 gives the trivial one-state ensemble."""
    if dim == 1:
        return Ensemble(np.ones((1, 1)), [1.0])
    res = find_fiducial(FiducialSearchConfig(dim, seed=seed, **search))
    if not res.success:
        raise SicSearchError(dim, res.potential)
    return res.sic.ensemble


@dataclass(frozen=True)
class QuantumnessGapReport:
    d1: int
    d2: int
    product_value: float
    composite_quantumness: float
    gap: float
    optimizer_value: float
    composite_sic_fidelity: float
    product_povm_fidelity: float
    entangled_states: int
    meta: dict = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return (self.d1 - 1) * (self.d2 - 1) == 0

    def to_dict(self) -> dict:
        return {
            "d1": self.d1, "d2": self.d2,
            "product_value": self.product_value,
            "composite_quantumness": self.composite_quantumness,
            "gap": self.gap,
            "optimizer_value": self.optimizer_value,
            "composite_sic_fidelity": self.composite_sic_fidelity,
            "product_povm_fidelity": self.product_povm_fidelity,
            "entangled_states": self.entangled_states,
            "degenerate": self.degenerate,
            "meta": self.meta,
        }


def _product_povm(a: Povm, b: Povm) -> Povm:
    return Povm(np.array([tensor(x, y) for x in a for y in b]))


def entanglement_gap_experiment(d1: int, d2: int, cfg: PovmSearchConfig = PovmSearchConfig(),
                                workers: int = 1) -> QuantumnessGapReport:
    """Witness that product signals cannot reach the composite quantumness.

    SICs are searched with ``cfg.seed``; the optimizer runs on the product of
    the two component SICs, and the composite-space SIC is evaluated under a
    random rank-1 POVM.
    """
    left = sic_ensemble(d1, cfg.seed)
    right = sic_ensemble(d2, cfg.seed)
    joint = sic_ensemble(d1 * d2, cfg.seed)
    prod = product_ensemble(left, right)

    search = accessible_fidelity_search(prod.joint, cfg, workers=workers)
    rng = child_rng(cfg.seed, 1 << 20)
    local = _product_povm(random_rank_one_povm(d1, d1 * d1, rng),
                          random_rank_one_povm(d2, d2 * d2, rng))
    product_povm_value = achievable_fidelity(prod.joint, local).value
    d = d1 * d2
    composite_value = achievable_fidelity(joint, random_rank_one_povm(d, d * d, rng)).value
    n_entangled = sum(is_entangled(k, d1, d2) for k in joint.kets)

    pv = product_fidelity_value(d1, d2)
    q = composite_quantumness(d1, d2)
    gap = pv - q
    if abs(gap) < 1e-15:
        gap = 0.0
    return QuantumnessGapReport(
        d1, d2, pv, q, gap, search.value, composite_value, product_povm_value, n_entangled,
        meta={"seed": cfg.seed, "search": search.report.meta})
