"""Ground-state upper bounds by stochastic growth of a correlated-Gaussian basis."""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ..systems import ParticleSystem
from ..thresholds import pair_energy
from .gaussians import Basis, pair_forms, pair_vectors

log = logging.getLogger(__name__)

STABILITY_MARGIN = 1e-4


class IllConditionedBasis(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    max_basis: int = 150
    candidates_per_step: int = 20
    width_range: tuple[float, float] = (0.1, 10.0)
    overlap_cutoff: float = 1e-12
    energy_tol: float = 1e-9
    # a candidate whose component orthogonal to the basis has squared norm
    # below this is rejected as (nearly) linearly dependent
    min_new_norm: float = 1e-7
    window: int = 10

    def __post_init__(self):
        lo, hi = self.width_range
        if not (0 < lo < hi):
            raise ValueError("width_range needs 0 < low < high")
        for name in ("max_basis", "candidates_per_step", "overlap_cutoff", "energy_tol", "window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["width_range"] = list(self.width_range)
        return rec

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_record(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class VariationalResult:
    energy: float
    basis_size: int
    seed: int
    trace: list = field(default_factory=list)
    system: Optional[dict] = None
    config: Optional[dict] = None

    def to_record(self) -> dict:
        return {
            "system": self.system,
            "seed": self.seed,
            "basis_size": self.basis_size,
            "energy": self.energy,
            "trace": list(self.trace),
            "config": self.config,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VariationalResult":
        return cls(rec["energy"], rec["basis_size"], rec["seed"], list(rec["trace"]), rec.get("system"), rec.get("config"))


@dataclass
class _Spectrum:
    energies: np.ndarray
    vectors: np.ndarray  # columns S-orthonormal eigenvectors in the original basis


def _spectrum(H: np.ndarray, S: np.ndarray, cutoff: float) -> _Spectrum:
    s, U = np.linalg.eigh(S)
    keep = s > cutoff * s[-1]
    if not np.any(keep):
        raise IllConditionedBasis("every overlap eigenvalue is below the cutoff")
    X = U[:, keep] / np.sqrt(s[keep])
    Hp = X.T @ H @ X
    e, V = np.linalg.eigh(0.5 * (Hp + Hp.T))
    return _Spectrum(e, X @ V)


def ground_state(basis: Basis, sys: Optional[ParticleSystem] = None, cutoff: float = 1e-12, seed: int = 0) -> VariationalResult:
    """Lowest generalized eigenvalue of (H, S) after dropping near-null overlap directions."""
    if len(basis) == 0:
        raise ValueError("empty basis")
    spec = _spectrum(basis.H, basis.S, cutoff)
    e = float(spec.energies[0])
    sys = sys or basis.sys
    return VariationalResult(e, len(basis), seed, [e], sys.to_record())


def _lowest_arrowhead(lam: np.ndarray, v: np.ndarray, corner: float) -> float:
    """Lowest eigenvalue of [[diag(lam), v], [v^T, corner]] (lam ascending)."""
    v2 = v * v

    def f(E):
        return corner - E - np.sum(v2 / (lam - E))

    scale = max(1.0, abs(lam[0]), abs(corner))
    hi = lam[0] - 1e-14 * scale
    if f(hi) >= 0:
        return min(lam[0], corner)
    lo = min(lam[0], corner) - math.sqrt(float(v2.sum())) - 1e-12 * scale
    return brentq(f, lo, hi, xtol=1e-15 * scale, rtol=1e-15, maxiter=200)


def length_scales(sys: ParticleSystem) -> np.ndarray:
    """Bohr length of each attractive pair; repulsive pairs get the largest one."""
    pairs, _ = pair_vectors(sys.n)
    L = np.full(len(pairs), np.nan)
    for p, (i, j) in enumerate(pairs):
        qq = sys.q[i] * sys.q[j]
        if qq < 0 and sys.x[i] + sys.x[j] > 0:
            L[p] = (sys.x[i] + sys.x[j]) / abs(qq)
    if np.all(np.isnan(L)):
        raise ValueError("no attractive pair with finite reduced mass")
    L[np.isnan(L)] = np.nanmax(L)
    return L


def make_rng(seed: int) -> np.random.Generator:
    # counter-based generator: reproducible across platforms
    return np.random.Generator(np.random.Philox(seed))


class _Sampler:
    def __init__(self, sys: ParticleSystem, config: SolverConfig, rng: np.random.Generator):
        self.L = length_scales(sys)
        _, self.w = pair_vectors(sys.n)
        self.lo, self.hi = np.log(config.width_range[0]), np.log(config.width_range[1])
        self.rng = rng

    def draw(self, k: int) -> np.ndarray:
        b = self.L * np.exp(self.rng.uniform(self.lo, self.hi, size=(k, len(self.L))))
        return pair_forms(1.0 / b**2, self.w)


def svm_optimize(sys: ParticleSystem, config: SolverConfig = SolverConfig(), basis_out: Optional[list] = None) -> VariationalResult:
    """Grow a basis one function at a time, keeping the best of several random candidates.

    Each candidate's energy is found from the bordered eigenproblem of the
    current spectrum, so a step costs O(K k^2) plus one O(k^3) refresh.
    The run stops at ``max_basis`` or once the relative gain over the last
    ``window`` additions falls below ``energy_tol``.  Deterministic per seed.
    """
    try:
        return _svm(sys, config, config.overlap_cutoff, basis_out)
    except IllConditionedBasis:
        log.warning("ill-conditioned basis at cutoff %g, retrying at 1e-10", config.overlap_cutoff)
        return _svm(sys, config, max(config.overlap_cutoff, 1e-10), basis_out)


def _svm(sys, config, cutoff, basis_out):
    rng = make_rng(config.seed)
    sampler = _Sampler(sys, config, rng)
    basis = Basis(sys, capacity=min(config.max_basis, 256))
    trace: list[float] = []
    spec: Optional[_Spectrum] = None
    stalls = 0
    while len(basis) < config.max_basis:
        forms = sampler.draw(config.candidates_per_step)
        best = None
        for A in forms:
            sign, logdet = np.linalg.slogdet(A)
            if sign <= 0:
                continue
            h_diag = basis.diagonal(A, logdet)
            if spec is None:
                E = h_diag
                s_row = h_row = np.zeros(0)
            else:
                s_row, h_row = basis.row(A, logdet)
                b = spec.vectors.T @ s_row
                c = spec.vectors.T @ h_row
                n2 = 1.0 - b @ b
                if n2 < config.min_new_norm:
                    continue
                lam = spec.energies
                v = (c - lam * b) / math.sqrt(n2)
                corner = (h_diag - 2.0 * b @ c + (lam * b) @ b) / n2
                E = _lowest_arrowhead(lam, v, corner)
            if best is None or E < best[0]:
                best = (E, A, s_row, h_row, h_diag)
        if best is None:
            stalls += 1
            if stalls > 50:
                break
            continue
        _, A, s_row, h_row, h_diag = best
        basis.append(A, s_row, h_row, h_diag)
        try:
            new_spec = _spectrum(basis.H, basis.S, cutoff)
        except IllConditionedBasis:
            if len(basis) == 1:
                raise
            new_spec = None
        e_new = None if new_spec is None else float(new_spec.energies[0])
        if e_new is None or (trace and e_new > trace[-1]):
            # filtering dropped a direction and raised the energy: undo
            basis = basis.subset(range(len(basis) - 1))
            stalls += 1
            if stalls > 50:
                break
            continue
        spec = new_spec
        trace.append(e_new)
        w = config.window
        if len(trace) > w and abs(trace[-1 - w] - trace[-1]) <= config.energy_tol * abs(trace[-1]):
            break
    if not trace:
        raise IllConditionedBasis("no admissible basis function found")
    if basis_out is not None:
        basis_out.append(basis)
    return VariationalResult(trace[-1], len(basis), config.seed, trace, sys.to_record(), config.to_record())


def certify_numeric(energy: float, threshold: float, margin: float = STABILITY_MARGIN) -> bool:
    """Upper bound proves binding only when clearly below the threshold."""
    return energy <= threshold - margin * abs(threshold)


def hydrogen_single_gaussian_energy(a: float) -> float:
    """Energy of ``exp(-a r^2)`` for hydrogen with an infinitely heavy nucleus."""
    return 1.5 * a - 2.0 * math.sqrt(2.0 * a / math.pi)


def two_body_energy(sys: ParticleSystem, i: int, j: int) -> float:
    return pair_energy(sys.x[i], sys.x[j], sys.q[i], sys.q[j])
