"""Numerical self-checks of the Fock oracle.

* ``closed_form_suite`` compares each closed-form family with the oracle;
* ``unitarity_suite`` sums detection probabilities over all outcomes;
* ``expm_suite`` compares matrix elements with ``expm`` of the splitter
  Hamiltonian in a truncated two-mode space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from . import closed_form
from .fock import BeamSplitter, ConditionalMap, conditional_map_oracle, two_mode_amplitude

ETA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
SIGNED_T_GRID = tuple(s * v for v in (0.1, 0.3, 0.5, 0.7, 0.9) for s in (1, -1))


@dataclass
class CheckResult:
    name: str
    passed: int = 0
    failed: int = 0
    worst: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, good: bool, err: float, what: str) -> None:
        self.worst = max(self.worst, err)
        if good:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(what)


# family -> (closed form, input offset, n as a function of k, valid k values)
FAMILIES: dict[str, tuple[Callable[[int, float], ConditionalMap], int, Callable[[int], int], range]] = {
    "keep": (closed_form.map_keep, 0, lambda k: k, range(0, 5)),
    "add": (closed_form.map_add, 0, lambda k: k - 1, range(1, 5)),
    "remove": (closed_form.map_remove, 1, lambda k: k + 1, range(0, 5)),
    "keep_offset1": (closed_form.map_keep_offset1, 1, lambda k: k, range(0, 5)),
}


def closed_form_suite(tol: float = 1e-9, etas=ETA_GRID) -> list[CheckResult]:
    results = []
    for name, (fn, offset, n_of, ks) in FAMILIES.items():
        res = CheckResult(f"closed-form {name}")
        for k in ks:
            for eta in etas:
                cf = fn(k, eta).factors
                orc = conditional_map_oracle(offset, k, n_of(k), BeamSplitter.from_eta(eta)).factors
                err = max(abs(a - b) for a, b in zip(cf, orc))
                res.record(err <= tol, err, f"k={k} eta={eta}: closed {cf} vs oracle {orc}")
        results.append(res)
    return results


def branch_norms(coefficients, input_offset: int, k: int, bs: BeamSplitter) -> dict[int, float]:
    """Probability of detecting ``n`` photons, from raw (unstripped) matrix elements."""
    out = {}
    for n in range(k + input_offset + 3):
        total = 0.0
        for j, c in enumerate(coefficients):
            p_a = j + input_offset + k - n
            if p_a >= 0:
                total += abs(two_mode_amplitude(p_a, n, j + input_offset, k, bs)) ** 2 * c * c
        out[n] = total
    return out


def unitarity_suite(tol: float = 1e-9, n_states: int = 20, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    states = rng.normal(size=(n_states, 3))
    states /= np.linalg.norm(states, axis=1, keepdims=True)
    res = CheckResult("unitarity")
    for offset in (0, 1):
        for k in range(5):
            for t in SIGNED_T_GRID:
                bs = BeamSplitter(t)
                for c in states:
                    s = sum(branch_norms(c, offset, k, bs).values())
                    err = abs(s - 1.0)
                    res.record(err <= tol, err, f"offset={offset} k={k} t={t}: sum={s!r}")
    return res


def _ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


def expm_unitary(theta: float, dim: int) -> np.ndarray:
    """``exp(i theta (a† b + b† a))`` on a ``dim x dim`` two-mode truncation, index ``p_a*dim + p_b``."""
    a = _ladder(dim)
    eye = np.eye(dim)
    A, B = np.kron(a, eye), np.kron(eye, a)
    return expm(1j * theta * (A.T @ B + B.T @ A))


def expm_suite(tol: float = 1e-12, max_total: int = 8, thetas=(0.3, 0.7, 1.2, 2.5)) -> CheckResult:
    res = CheckResult("matrix-exponential")
    dim = max_total + 1
    for theta in thetas:
        U = expm_unitary(theta, dim)
        bs = BeamSplitter(math.cos(theta))
        if math.sin(theta) < 0:
            continue  # r >= 0 convention covers theta in [0, pi]
        for ma in range(dim):
            for mb in range(dim - ma):
                for pa in range(ma + mb + 1):
                    pb = ma + mb - pa
                    ref = U[pa * dim + pb, ma * dim + mb]
                    got = two_mode_amplitude(pa, pb, ma, mb, bs)
                    err = abs(ref - got)
                    res.record(err <= tol, err, f"theta={theta} <{pa},{pb}|U|{ma},{mb}>")
    return res


def run_all() -> list[CheckResult]:
    return closed_form_suite() + [unitarity_suite(), expm_suite()]
