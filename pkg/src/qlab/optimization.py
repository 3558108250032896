"""Numerical searches: accessible fidelity over POVMs, SIC fiducials, and the
Haar-average fidelity of a random von Neumann measurement.

Every stochastic routine takes an explicit 64-bit seed. Independent work
units (restarts, Monte Carlo blocks) draw from child streams spawned from
that seed by index, so results do not depend on how units are scheduled.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, TypeVar

import numpy as np
from scipy.optimize import minimize

from .ensembles import Ensemble, FidelityReport, Method, achievable_fidelity
from .operators import Povm, haar_random_unitaries, polar_coisometry, validate_povm
from .structured_states import SicCertificate, SicEnsemble, sic_from_fiducial, verify_sic, \
    wh_displacements

log = logging.getLogger(__name__)

T = TypeVar("T")

MC_BLOCK = 8192


def child_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def run_units(fn: Callable[[int], T], n: int, workers: int = 1) -> list[T]:
    """Evaluate fn(0..n-1), optionally on a thread pool; order is preserved."""
    if workers <= 1 or n <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


# -- accessible fidelity ------------------------------------------------------

@dataclass(frozen=True)
class PovmSearchConfig:
    n_outcomes: int | None = None  # None: d^2
    n_restarts: int = 8
    max_iters: int = 1000
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if self.n_outcomes is not None and self.n_outcomes < 1:
            raise ValueError("n_outcomes must be positive")
        if self.n_restarts < 1 or self.max_iters < 1:
            raise ValueError("n_restarts and max_iters must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class RestartTrace:
    restart: int
    values: list[float]
    converged: bool

    @property
    def best(self) -> float:
        return max(self.values)


@dataclass(frozen=True)
class PovmSearchResult:
    report: FidelityReport
    povm: Povm
    traces: list[RestartTrace] = field(repr=False)

    @property
    def value(self) -> float:
        return self.report.value

    def trace_rows(self):
        for t in self.traces:
            for it, v in enumerate(t.values):
                yield t.restart, it, v


def _ascend(kets: np.ndarray, probs: np.ndarray, w: np.ndarray, max_iters: int, tol: float):
    """Polar fixed-point ascent of sum_b lambda_1(Psi(w_b w_b^dagger)).

    The objective is convex in the co-isometry W (a sum of maxima of PSD
    quadratic forms), so moving to the polar factor of its gradient never
    decreases it.
    """
    values = []
    converged = False
    for _ in range(max_iters):
        amp = kets.conj() @ w                          # <psi_i|w_b>
        mapped = np.einsum("i,ib,ik,il->bkl", probs, np.abs(amp) ** 2, kets, kets.conj())
        vals, vecs = np.linalg.eigh(mapped)
        values.append(float(vals[:, -1].sum()))
        if len(values) > 1 and values[-1] - values[-2] < tol:
            converged = True
            break
        top = kets.conj() @ vecs[:, :, -1].T           # <psi_i|u_b>
        # gradient column b: Psi(u_b u_b^dagger) w_b
        grad = np.einsum("i,ib,ik,ib->kb", probs, np.abs(top) ** 2, kets, amp)
        w = polar_coisometry(grad)
    return w, values, converged


def accessible_fidelity_search(p: Ensemble, cfg: PovmSearchConfig = PovmSearchConfig(),
                               workers: int = 1) -> PovmSearchResult:
    """Multi-restart search for the best rank-1 POVM; the value is a lower bound on F_P.

    A POVM with n outcomes is parameterized by n complex vectors v_b as
    E_b = A^{-1/2} v_b v_b^dagger A^{-1/2}, A = sum_b v_b v_b^dagger, so
    completeness holds by construction.
    """
    d = p.dim
    n = cfg.n_outcomes or d * d
    n = max(n, d)
    kets, probs = np.asarray(p.kets), np.asarray(p.probs)

    def restart(k: int):
        rng = child_rng(cfg.seed, k)
        v = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
        return _ascend(kets, probs, polar_coisometry(v), cfg.max_iters, cfg.tol)

    runs = run_units(restart, cfg.n_restarts, workers)
    traces = [RestartTrace(k, vals, conv) for k, (_, vals, conv) in enumerate(runs)]
    best = max(range(len(runs)), key=lambda k: traces[k].best)
    povm = Povm.from_columns(runs[best][0])
    # the returned value is re-evaluated on the emitted POVM
    value = achievable_fidelity(p, povm).value
    check = validate_povm(povm, tol=1e-8)
    report = FidelityReport(value, Method.OPTIMIZER, meta={
        "quantity": "accessible_fidelity",
        "lower_bound": True,
        "variant": "polar_fixed_point",
        "n_outcomes": n,
        "n_restarts": cfg.n_restarts,
        "best_restart": best,
        "restart_values": [t.best for t in traces],
        "seed": cfg.seed,
        "povm_valid": check.passed,
    })
    return PovmSearchResult(report, povm, traces)


# -- SIC fiducial search ------------------------------------------------------

def frame_potential(states: Sequence[np.ndarray] | np.ndarray) -> float:
    """sum_{i != j} (|<psi_i|psi_j>|^2 - 1/(d+1))^2; zero exactly on SIC configurations."""
    kets = np.asarray(states, dtype=complex)
    d = kets.shape[1]
    dev = np.abs(kets.conj() @ kets.T) ** 2 - 1 / (d + 1)
    np.fill_diagonal(dev, 0.0)
    return float(np.sum(dev * dev))


@dataclass(frozen=True)
class FiducialSearchConfig:
    dim: int
    n_restarts: int = 20
    max_iters: int = 5000
    grad_tol: float = 1e-15
    potential_tol: float = 1e-18
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("fiducial search needs dim >= 2")
        if self.n_restarts < 1 or self.max_iters < 1:
            raise ValueError("n_restarts and max_iters must be positive")
        if not (self.grad_tol > 0 and self.potential_tol >= 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class FiducialSearchResult:
    success: bool
    fiducial: np.ndarray
    potential: float
    sic: SicEnsemble
    certificate: SicCertificate
    restart_potentials: list[float]
    seed: int


class _OrbitPotential:
    """Frame potential of a WH orbit as a function of 2d-1 real parameters.

    The first amplitude is kept real (phase gauge); normalization is implicit
    because the overlaps are computed as |<v|D v>|^2 / <v|v>^2.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.disp = wh_displacements(dim)[1:]
        self.disp_adj = np.conj(np.swapaxes(self.disp, 1, 2))
        self.target = 1 / (dim + 1)

    def unpack(self, x: np.ndarray) -> np.ndarray:
        d = self.dim
        v = np.empty(d, dtype=complex)
        v[0] = x[0]
        v[1:] = x[1:d] + 1j * x[d:]
        return v

    def pack(self, v: np.ndarray) -> np.ndarray:
        v = v * np.exp(-1j * np.angle(v[0]))
        return np.concatenate([[v[0].real], v[1:].real, v[1:].imag])

    def __call__(self, x: np.ndarray):
        d = self.dim
        v = self.unpack(x)
        norm = np.vdot(v, v).real
        dv = self.disp @ v
        c = dv @ v.conj()
        r = np.abs(c) ** 2 / norm ** 2 - self.target
        # each nontrivial displacement appears in d^2 ordered pairs of the orbit
        value = d * d * np.sum(r * r)
        dr = (c.conj()[:, None] * dv + c[:, None] * (self.disp_adj @ v)) / norm ** 2 \
            - 2 * (np.abs(c) ** 2)[:, None] * v / norm ** 3
        g = 2 * d * d * (r[:, None] * dr).sum(axis=0)
        grad = 2 * np.concatenate([[g[0].real], g[1:].real, g[1:].imag])
        return value, grad


def gauge_fix(v: np.ndarray) -> np.ndarray:
    """Unit norm, first nonzero amplitude real and nonnegative."""
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v) > 1e-14)
    if nz.size:
        v = v * np.exp(-1j * np.angle(v[nz[0]]))
    return v


def find_fiducial(cfg: FiducialSearchConfig, workers: int = 1) -> FiducialSearchResult:
    """Minimize the orbit frame potential from Haar-random starts.

    Restarts stop at the first success when run serially; with several
    workers all restarts run and the first successful index wins, so the
    answer is the same either way.
    """
    objective = _OrbitPotential(cfg.dim)

    def restart(k: int):
        rng = child_rng(cfg.seed, k)
        z = rng.standard_normal(cfg.dim) + 1j * rng.standard_normal(cfg.dim)
        res = minimize(objective, objective.pack(z), jac=True, method="L-BFGS-B",
                       options={"maxiter": cfg.max_iters, "ftol": 0.0, "gtol": cfg.grad_tol,
                                "maxcor": 30})
        fid = gauge_fix(objective.unpack(res.x))
        return fid, frame_potential(sic_from_fiducial(fid).kets)

    potentials: list[float] = []
    best = None
    if workers <= 1:
        for k in range(cfg.n_restarts):
            fid, pot = restart(k)
            potentials.append(pot)
            if best is None or pot < best[1]:
                best = (fid, pot)
            if pot < cfg.potential_tol:
                break
    else:
        runs = run_units(restart, cfg.n_restarts, workers)
        ok = [k for k, (_, pot) in enumerate(runs) if pot < cfg.potential_tol]
        if ok:
            runs = runs[:ok[0] + 1]
        potentials = [pot for _, pot in runs]
        best = runs[ok[0]] if ok else min(runs, key=lambda r: r[1])
    fid, pot = best
    sic = sic_from_fiducial(fid)
    cert = verify_sic(sic)
    success = pot < cfg.potential_tol
    if not success:
        log.info("fiducial search in d=%d failed; best potential %.3g", cfg.dim, pot)
    return FiducialSearchResult(success, fid, pot, sic, cert, potentials, cfg.seed)


# -- Haar average over random von Neumann measurements ------------------------

@dataclass(frozen=True)
class MonteCarloConfig:
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")


def von_neumann_fidelity_samples(p: Ensemble, n: int, rng: np.random.Generator) -> np.ndarray:
    """sum_{b,i} pi_i (tr Pi_i G_b)^2 for n Haar-random bases, resending G_b."""
    bases = haar_random_unitaries(p.dim, n, rng)       # columns are the G_b directions
    amp = np.einsum("ik,nkb->nib", p.kets.conj(), bases)
    return np.einsum("i,nib->n", p.probs, np.abs(amp) ** 4)


def haar_average_fidelity(p: Ensemble, cfg: MonteCarloConfig = MonteCarloConfig(),
                          workers: int = 1) -> FidelityReport:
    n_blocks = -(-cfg.n_samples // MC_BLOCK)

    def block(k: int):
        size = min(MC_BLOCK, cfg.n_samples - k * MC_BLOCK)
        return von_neumann_fidelity_samples(p, size, child_rng(cfg.seed, k))

    samples = np.concatenate(run_units(block, n_blocks, workers))
    n = len(samples)
    mean = float(samples.mean())
    stderr = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return FidelityReport(mean, Method.MONTE_CARLO, stderr=stderr, meta={
        "quantity": "haar_average_fidelity",
        "n_samples": n,
        "seed": cfg.seed,
        "reference": haar_integral_closed_form(p.dim),
    })


def consistent_with(report: FidelityReport, target: float, n_sigma: float = 3.0,
                    floor: float = 1e-12) -> bool:
    """|estimate - target| within n_sigma standard errors.

    ``floor`` absorbs rounding when the integrand is constant, as it is for
    SIC and MUB ensembles, and the standard error collapses to ~1e-18.
    """
    return abs(report.value - target) <= n_sigma * (report.stderr or 0.0) + floor


def haar_integral_factorial(dim: int) -> Fraction:
    """d (d-1)! 2! / (d+1)! in exact integer arithmetic."""
    return Fraction(dim * math.factorial(dim - 1) * 2, math.factorial(dim + 1))


def haar_integral_closed_form(dim: int) -> float:
    """Haar average 2/(d+1) of the resend-what-you-measured strategy."""
    if dim < 1:
        raise ValueError("dim must be positive")
    if dim <= 20 and haar_integral_factorial(dim) != Fraction(2, dim + 1):
        raise ArithmeticError(f"factorial form disagrees with 2/(d+1) at d={dim}")
    return 2 / (dim + 1)
