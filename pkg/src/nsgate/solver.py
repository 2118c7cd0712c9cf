"""Multistart damped Newton search for NS-gate transmission amplitudes.

Seeds cover the signed amplitude cube on a uniform grid with every sign
pattern. All seeds iterate together as numpy arrays; converged points are
grouped into solution classes by their transmitivity vector. When more
amplitudes are free than there are constraints, the landing points are
pushed uphill in ``F0**2`` along the solution manifold.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import NotAGateError
from .fock import PHOTON_CAP, element_polynomial
from .sequence import ElementSpec, SequenceSpec, compose, ns_residuals

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Search settings.

    ``grid`` seeds per axis are used when the system is square (two free
    amplitudes) or overdetermined; ``grid_manifold`` replaces it when more
    amplitudes are free, since each landing point is then refined by a
    constrained optimisation anyway.
    """

    grid: int = 41
    tol: float = 1e-10
    dedupe: float = 1e-6
    max_iter: int = 200
    max_halvings: int = 12
    t_min: float = 1e-4
    t_max: float = 1.0 - 1e-9
    grid_manifold: int = 7
    manifold_dedupe: float = 1e-4
    verify_tol: float = 1e-8
    photon_cap: int = PHOTON_CAP

    def __post_init__(self):
        if self.grid < 5 or self.grid_manifold < 2:
            raise ValueError("grid must be >= 5 and grid_manifold >= 2")
        if self.tol <= 0 or self.dedupe <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class GateSolution:
    sequence: SequenceSpec
    amplitudes: tuple[float, ...]
    residuals: tuple[float, float]
    probability: float
    class_size: int = 1
    frozen: tuple[int, ...] = field(default=())

    @property
    def etas(self) -> tuple[float, ...]:
        return tuple(t * t for t in self.amplitudes)

    @property
    def P(self) -> float:
        return self.probability

    @property
    def residual_norm(self) -> float:
        return math.hypot(*self.residuals)


class _Batch:
    """Vectorised residuals and Jacobians for one sequence with some amplitudes frozen."""

    def __init__(self, seq: SequenceSpec, fixed: Mapping[int, float], cap: int):
        if seq.net_offset != 0:
            raise NotAGateError(f"{seq} shifts the photon number by {seq.net_offset}")
        offsets = seq.offsets
        self.polys = [
            element_polynomial(offsets[i], e.k, e.n, cap) for i, e in enumerate(seq.elements)
        ]
        self.fixed = dict(fixed)
        self.free = [i for i in range(len(seq)) if i not in self.fixed]

    def full(self, x: np.ndarray) -> np.ndarray:
        out = np.empty((x.shape[0], len(self.polys)))
        for i, t in self.fixed.items():
            out[:, i] = t
        out[:, self.free] = x
        return out

    def factors(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Composed ``F`` with shape (3, N) and ``dF/dx`` with shape (3, N, L)."""
        T = self.full(x)
        vals, ders = zip(*(p.evaluate_with_derivative(T[:, i]) for i, p in enumerate(self.polys)))
        F = np.prod(np.stack(vals), axis=0)
        dF = np.empty((3, x.shape[0], len(self.free)))
        for col, i in enumerate(self.free):
            others = [vals[j] for j in range(len(vals)) if j != i]
            rest = np.prod(np.stack(others), axis=0) if others else 1.0
            with np.errstate(invalid="ignore"):  # inf * 0 at |t| = 1 is masked by the caller
                dF[:, :, col] = ders[i] * rest
        return F, dF

    def residual(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Residuals (N, 2), Jacobian (N, 2, L) and F0 (N,)."""
        F, dF = self.factors(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            F0 = F[0]
            r = np.stack([F[1] / F0 - 1.0, F[2] / F0 + 1.0], axis=1)
            J = np.stack(
                [
                    (dF[1] * F0[:, None] - F[1][:, None] * dF[0]) / (F0**2)[:, None],
                    (dF[2] * F0[:, None] - F[2][:, None] * dF[0]) / (F0**2)[:, None],
                ],
                axis=1,
            )
        return r, J, F0


def _seeds(n_free: int, grid: int) -> np.ndarray:
    mags = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    signed = np.concatenate([mags, -mags])
    return np.array(list(itertools.product(signed, repeat=n_free)), dtype=float).reshape(-1, n_free)


def _in_domain(x: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    a = np.abs(x)
    return np.all((a >= cfg.t_min) & (a <= cfg.t_max), axis=1)


def _min_norm_step(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Batched ``pinv(J) @ r`` for 2-row Jacobians, closed form where well conditioned."""
    n_cols = J.shape[2]
    if n_cols == 1:
        g = np.einsum("nij,nij->n", J, J)
        out = np.einsum("nij,ni->nj", J, r)
        ok = g > 1e-300
        out[ok] /= g[ok, None]
        out[~ok] = 0.0
        return out
    G = np.einsum("nik,njk->nij", J, J)
    det = G[:, 0, 0] * G[:, 1, 1] - G[:, 0, 1] * G[:, 1, 0]
    scale = G[:, 0, 0] * G[:, 1, 1]
    ok = np.abs(det) > 1e-12 * np.where(scale > 0, scale, 1.0)
    out = np.empty((J.shape[0], n_cols))
    if ok.any():
        Gi, ro = G[ok], r[ok]
        y = np.stack(
            [Gi[:, 1, 1] * ro[:, 0] - Gi[:, 0, 1] * ro[:, 1], Gi[:, 0, 0] * ro[:, 1] - Gi[:, 1, 0] * ro[:, 0]],
            axis=1,
        ) / det[ok, None]
        out[ok] = np.einsum("nij,ni->nj", J[ok], y)
    if (~ok).any():
        out[~ok] = np.einsum("nij,nj->ni", np.linalg.pinv(J[~ok]), r[~ok])
    return out


def _newton(batch: _Batch, x: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Damped (min-norm) Newton on all seeds; returns final points and a converged mask."""
    x = x.copy()
    r, J, F0 = batch.residual(x)
    norm = np.linalg.norm(r, axis=1)
    alive = np.isfinite(norm) & (np.abs(F0) > 1e-300)
    done = alive & (norm < cfg.tol)
    for _ in range(cfg.max_iter):
        act = np.flatnonzero(alive & ~done)
        if act.size == 0:
            break
        Ja, ra = J[act], r[act]
        finite = np.all(np.isfinite(Ja), axis=(1, 2))
        step = np.zeros((act.size, x.shape[1]))
        if finite.any():
            step[finite] = _min_norm_step(Ja[finite], ra[finite])
        alive[act[~finite]] = False
        lam = np.ones(act.size)
        accepted = np.zeros(act.size, dtype=bool)
        pending = finite.copy()
        for _ in range(cfg.max_halvings):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            trial = x[act[idx]] - lam[idx, None] * step[idx]
            ok = _in_domain(trial, cfg)
            rt, Jt, F0t = batch.residual(trial)
            nt = np.linalg.norm(rt, axis=1)
            good = ok & np.isfinite(nt) & (nt < norm[act[idx]])
            g = idx[good]
            x[act[g]] = trial[good]
            r[act[g]], J[act[g]], F0[act[g]], norm[act[g]] = rt[good], Jt[good], F0t[good], nt[good]
            accepted[g] = True
            pending[g] = False
            lam[idx[~good]] *= 0.5
        alive[act[~accepted]] = False
        done |= alive & (norm < cfg.tol)
    return x, done


def _cluster(points: np.ndarray, radius: float) -> list[list[int]]:
    """Greedy grouping of rows of ``points`` within max-norm ``radius``.

    Points are visited in lexicographic order; each still-unassigned point
    becomes a representative and claims every unassigned point near it.
    """
    order = np.lexsort(points.T[::-1])
    remaining = points[order]
    idx = order
    groups: list[list[int]] = []
    while len(idx):
        near = np.max(np.abs(remaining - remaining[0]), axis=1) < radius
        groups.append([int(i) for i in idx[near]])
        remaining, idx = remaining[~near], idx[~near]
    return groups


def _maximise_on_manifold(batch: _Batch, x0: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    lo = np.where(x0 > 0, cfg.t_min, -cfg.t_max)
    hi = np.where(x0 > 0, cfg.t_max, -cfg.t_min)

    def objective(x):
        F, dF = batch.factors(x[None, :])
        return -F[0, 0] ** 2, -2 * F[0, 0] * dF[0, 0]

    def cons(x):
        return batch.residual(x[None, :])[0][0]

    def cons_jac(x):
        return batch.residual(x[None, :])[1][0]

    res = minimize(
        objective,
        x0,
        jac=True,
        method="SLSQP",
        bounds=list(zip(lo, hi)),
        constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
        options={"ftol": 1e-15, "maxiter": 500},
    )
    return np.clip(res.x, lo, hi)


def solve_ns(
    seq: SequenceSpec,
    config: SolverConfig | None = None,
    fixed: Mapping[int, float] | None = None,
) -> list[GateSolution]:
    """All NS solution classes of ``seq``, best success probability first.

    Args:
        seq: sequence with zero net photon shift.
        config: search settings; defaults to :class:`SolverConfig()`.
        fixed: element index -> frozen signed amplitude.

    Returns:
        One :class:`GateSolution` per distinct transmitivity vector. An empty
        list means no solution exists in the search domain.
    """
    cfg = config or SolverConfig()
    fixed = dict(fixed or {})
    batch = _Batch(seq, fixed, cfg.photon_cap)
    n_free = len(batch.free)
    if n_free == 0:
        x = np.zeros((1, 0))
        r, _, _ = batch.residual(x)
        candidates = x if np.linalg.norm(r[0]) < cfg.tol else np.zeros((0, 0))
        radius = cfg.dedupe
    else:
        manifold = n_free > 2
        seeds = _seeds(n_free, cfg.grid_manifold if manifold else cfg.grid)
        x, done = _newton(batch, seeds, cfg)
        candidates = x[done]
        radius = cfg.dedupe
        if manifold and len(candidates):
            landing = candidates[[g[0] for g in _cluster(candidates**2, 0.05)]]
            peaks = np.array([_maximise_on_manifold(batch, p, cfg) for p in landing])
            x, done = _newton(batch, peaks, cfg)
            candidates = x[done]
            radius = cfg.manifold_dedupe

    solutions = []
    if len(candidates):
        full = batch.full(candidates)
        for group in _cluster(full**2, radius):
            members = full[group]
            S = np.where(members > 0, 1, -1)
            signs = np.unique(S, axis=0)
            # most positive sign pattern first, earliest member on ties
            rep_idx = np.lexsort((np.arange(len(group)), *(-S.T[::-1])))[0]
            rep = candidates[group[rep_idx]][None, :]
            if n_free:
                rep, _ = _newton(batch, rep, replace(cfg, tol=1e-15, max_iter=3))
            amps = tuple(float(v) for v in batch.full(rep)[0])
            sol = _verified(seq, amps, len(signs), tuple(sorted(fixed)), cfg)
            if sol is not None:
                solutions.append(sol)
    solutions.sort(key=lambda s: (-round(s.probability, 9), s.etas))
    return solutions


def _verified(
    seq: SequenceSpec, amps: tuple[float, ...], class_size: int, frozen: tuple[int, ...], cfg: SolverConfig
) -> GateSolution | None:
    """Re-evaluate through the reference oracle path; drop anything that fails."""
    cmap = compose(seq, amps)
    res = ns_residuals(cmap)
    if math.hypot(*res) >= cfg.verify_tol:
        log.warning("discarding %s at %s: residual %.3g", seq, amps, math.hypot(*res))
        return None
    return GateSolution(seq, amps, res, cmap.F0**2, class_size, frozen)


@dataclass(frozen=True)
class ScanEntry:
    sequence: SequenceSpec
    best: GateSolution | None
    equivalents: tuple[SequenceSpec, ...] = ()

    @property
    def probability(self) -> float | None:
        return None if self.best is None else self.best.probability


def enumerate_sequences(max_k: int, length: int) -> list[tuple[SequenceSpec, tuple[SequenceSpec, ...]]]:
    """Offset-valid, photon-number-neutral sequences with every count in ``0..max_k``.

    Reorderings of photon-preserving sequences act identically, so only the
    descending order is kept; the others are returned as equivalents.
    """
    elements = [ElementSpec(k, n) for k in range(max_k + 1) for n in range(max_k + 1)]
    seen: dict[tuple, list[SequenceSpec]] = {}
    for combo in itertools.product(elements, repeat=length):
        off, valid = 0, True
        for e in combo:
            off += e.shift
            if off < 0:
                valid = False
                break
        if not valid or off != 0:
            continue
        seq = SequenceSpec(combo)
        key = tuple(sorted(combo, reverse=True)) if seq.photon_preserving else combo
        seen.setdefault(key, []).append(seq)
    out = []
    for key, seqs in seen.items():
        canon = SequenceSpec(key)
        out.append((canon, tuple(s for s in seqs if s != canon)))
    out.sort(key=lambda item: str(item[0]))
    return out


def _scan_one(args: tuple[SequenceSpec, tuple[SequenceSpec, ...], SolverConfig]) -> ScanEntry:
    seq, equivalents, cfg = args
    sols = solve_ns(seq, cfg)
    return ScanEntry(seq, sols[0] if sols else None, equivalents)


def rank_entries(entries: Sequence[ScanEntry]) -> list[ScanEntry]:
    solved = [e for e in entries if e.best is not None]
    unsolved = [e for e in entries if e.best is None]
    solved.sort(key=lambda e: (-round(e.best.probability, 9), str(e.sequence)))
    unsolved.sort(key=lambda e: str(e.sequence))
    return solved + unsolved


def scan_sequences(
    max_k: int = 4, length: int = 2, config: SolverConfig | None = None, workers: int = 1
) -> list[ScanEntry]:
    """Best NS solution of every sequence, ranked by success probability."""
    if length not in (2, 3):
        raise ValueError("length must be 2 or 3")
    if not 0 <= max_k <= 4:
        raise ValueError("max_k must be in 0..4")
    cfg = config or SolverConfig()
    jobs = [(seq, eq, cfg) for seq, eq in enumerate_sequences(max_k, length)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_scan_one, jobs, chunksize=1))
    else:
        entries = [_scan_one(j) for j in jobs]
    return rank_entries(entries)


def find_entry(entries: Sequence[ScanEntry], seq: SequenceSpec) -> ScanEntry:
    for e in entries:
        if e.sequence == seq or seq in e.equivalents:
            return e
    raise KeyError(str(seq))
