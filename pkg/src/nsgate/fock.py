"""Exact two-mode beam-splitter arithmetic on Fock states.

Everything here is brute force over creation-operator monomials and is the
ground truth that the closed-form maps and the solver are checked against.

Convention: ``a† -> t a† + i r b†`` and ``b† -> i r a† + t b†`` with
``r = +sqrt(1 - t**2)``. Mode ``a`` is the signal beam and ``b`` the
auxiliary mode that carries ``k`` injected photons and is measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDetectionError, LossyBranchError, PhotonCapError

PHOTON_CAP = 12
_I_POWERS = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter with signed transmission amplitude ``t``.

    ``eta`` is stored alongside ``t`` so that splitters built from an exact
    transmitivity (e.g. 0.5) keep ``1 - eta`` exact; otherwise it is ``t**2``.
    """

    t: float
    eta: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not -1.0 <= self.t <= 1.0:
            raise ValueError(f"transmission amplitude {self.t} outside [-1, 1]")
        if self.eta is None:
            object.__setattr__(self, "eta", self.t * self.t)
        elif abs(self.eta - self.t * self.t) > 1e-12:
            raise ValueError(f"eta={self.eta} inconsistent with t={self.t}")

    @classmethod
    def from_eta(cls, eta: float, sign: int = 1) -> "BeamSplitter":
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"transmitivity {eta} outside [0, 1]")
        return cls(math.copysign(math.sqrt(eta), sign), eta)

    @property
    def r(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.eta))

    def t_pow(self, p: int) -> float:
        return self.eta ** (p // 2) * (self.t if p % 2 else 1.0)

    def r_pow(self, p: int) -> float:
        return (1.0 - self.eta) ** (p // 2) * (self.r if p % 2 else 1.0)


@lru_cache(maxsize=None)
def _monomial_terms(p_a: int, m_a: int, m_b: int) -> tuple[tuple[int, int, int], ...]:
    """Terms ``(coef, t_power, cross_power)`` of the a†^p_a b†^(N-p_a) coefficient.

    Expands ``(t a† + i r b†)^m_a (i r a† + t b†)^m_b``; ``cross_power`` counts
    photons that changed mode and carries the ``(i r)`` factors.
    """
    terms = []
    for j in range(m_a + 1):  # photons leaving a
        l = p_a - (m_a - j)  # photons arriving from b
        if 0 <= l <= m_b:
            coef = math.comb(m_a, j) * math.comb(m_b, l)
            terms.append((coef, (m_a - j) + (m_b - l), j + l))
    return tuple(terms)


def _check_counts(counts: Iterable[int], cap: int) -> int:
    counts = tuple(counts)
    if any(c < 0 for c in counts):
        raise ValueError(f"negative photon count in {counts}")
    total = max(counts[0] + counts[1], counts[2] + counts[3])
    if total > cap:
        raise PhotonCapError(f"photon total {total} exceeds cap {cap}")
    return total


def two_mode_amplitude(
    p_a: int, p_b: int, m_a: int, m_b: int, bs: BeamSplitter, cap: int = PHOTON_CAP
) -> complex:
    """Matrix element ``<p_a, p_b| U |m_a, m_b>`` of the beam splitter.

    The result is always a real number times ``i**x`` where ``x`` is the
    parity of ``p_a - m_a``. Mismatched photon totals give an exact zero.
    """
    _check_counts((p_a, p_b, m_a, m_b), cap)
    if p_a + p_b != m_a + m_b:
        return 0j
    parity = (p_a - m_a) % 2
    acc = 0.0
    for coef, tp, cp in _monomial_terms(p_a, m_a, m_b):
        # i**cp = i**parity * (-1)**((cp - parity) // 2)
        sign = -1 if ((cp - parity) // 2) % 2 else 1
        acc += sign * coef * bs.t_pow(tp) * bs.r_pow(cp)
    norm = math.sqrt(
        (math.factorial(p_a) * math.factorial(p_b)) / (math.factorial(m_a) * math.factorial(m_b))
    )
    return _I_POWERS[parity] * (acc * norm)


@dataclass(frozen=True)
class ModeState:
    """Real signal state ``alpha|off> + beta|off+1> + gamma|off+2>``."""

    alpha: float
    beta: float
    gamma: float
    offset: int = 0

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])

    @property
    def norm_squared(self) -> float:
        return float(self.coefficients @ self.coefficients)

    def is_normalized(self, tol: float = 1e-9) -> bool:
        return abs(self.norm_squared - 1.0) <= tol


@dataclass(frozen=True)
class ConditionalMap:
    """Diagonal action of one splitter-plus-detection on ``(alpha, beta, gamma)``.

    ``removed_phase_power`` is the ``m`` in the stripped global phase ``i**m``.
    """

    f0: float
    f1: float
    f2: float
    input_offset: int = 0
    output_offset: int = 0
    k: int = 0
    n: int = 0
    t: float = 1.0
    removed_phase_power: int = 0

    def __post_init__(self):
        if self.output_offset != self.input_offset + self.k - self.n:
            raise ValueError("output_offset must equal input_offset + k - n")
        if self.output_offset < 0:
            raise LossyBranchError(
                f"element ({self.k},{self.n}) removes {self.n - self.k} photons "
                f"from a beam carrying {self.input_offset} extra"
            )

    @property
    def factors(self) -> tuple[float, float, float]:
        return (self.f0, self.f1, self.f2)

    def apply(self, state: ModeState) -> ModeState:
        if state.offset != self.input_offset:
            raise ValueError(f"state offset {state.offset} != map input offset {self.input_offset}")
        return ModeState(
            self.f0 * state.alpha, self.f1 * state.beta, self.f2 * state.gamma, self.output_offset
        )


def strip_phase(raw: Sequence[complex]) -> tuple[tuple[float, float, float], int]:
    """Split a raw triple sharing one power of ``i`` into real factors and ``m``.

    The first nonzero factor comes out positive; relative signs are kept.
    """
    raw = [complex(z) for z in raw]
    ref = next((z for z in raw if z != 0), None)
    if ref is None:
        return (0.0, 0.0, 0.0), 0
    m = 1 if abs(ref.imag) > abs(ref.real) else 0
    real = [(z * _I_POWERS[(4 - m) % 4]).real for z in raw]
    first = next(x for x in real if x != 0)
    if first < 0:
        real = [-x for x in real]
        m += 2
    return (real[0] + 0.0, real[1] + 0.0, real[2] + 0.0), m


def canonical_phase(
    raw: Sequence[complex], input_offset: int = 0, k: int = 0, n: int = 0, t: float = 1.0
) -> ConditionalMap:
    """Build a :class:`ConditionalMap` in canonical form from raw amplitudes."""
    (f0, f1, f2), m = strip_phase(raw)
    return ConditionalMap(f0, f1, f2, input_offset, input_offset + k - n, k, n, t, m)


def _check_element(input_offset: int, k: int, n: int) -> None:
    if input_offset < 0 or k < 0 or n < 0:
        raise ValueError(f"negative count in offset={input_offset}, k={k}, n={n}")
    if n > k + input_offset + 2:
        raise InvalidDetectionError(
            f"cannot detect {n} photons: at most {k + input_offset + 2} available"
        )
    if n - k > input_offset:
        raise LossyBranchError(
            f"detecting {n} of {k} injected photons removes more than the "
            f"{input_offset} photons already added"
        )


def raw_element_factors(
    input_offset: int, k: int, n: int, bs: BeamSplitter, cap: int = PHOTON_CAP
) -> tuple[complex, complex, complex]:
    """Un-phase-stripped amplitudes for signal levels 0, 1, 2 above the offset."""
    _check_element(input_offset, k, n)
    return tuple(
        two_mode_amplitude(j + input_offset + k - n, n, j + input_offset, k, bs, cap)
        for j in range(3)
    )  # type: ignore[return-value]


def conditional_map_oracle(
    input_offset: int, k: int, n: int, bs: BeamSplitter, cap: int = PHOTON_CAP
) -> ConditionalMap:
    """Exact conditional action of element ``(k, n)`` on a beam with ``input_offset`` extra photons."""
    raw = raw_element_factors(input_offset, k, n, bs, cap)
    return canonical_phase(raw, input_offset, k, n, bs.t)


class TwoModeFockVector:
    """Sparse two-mode state with amplitudes keyed by ``(photons_a, photons_b)``."""

    def __init__(self, amplitudes: dict[tuple[int, int], complex] | None = None, cap: int = PHOTON_CAP):
        self.cap = cap
        self.amplitudes: dict[tuple[int, int], complex] = {}
        for (pa, pb), amp in (amplitudes or {}).items():
            if pa < 0 or pb < 0:
                raise ValueError(f"negative photon count ({pa}, {pb})")
            if pa + pb > cap:
                raise PhotonCapError(f"basis state ({pa}, {pb}) exceeds cap {cap}")
            if amp != 0:
                self.amplitudes[(pa, pb)] = complex(amp)

    @classmethod
    def from_signal(
        cls, coefficients: Sequence[float], input_offset: int, k: int, cap: int = PHOTON_CAP
    ) -> "TwoModeFockVector":
        """Signal state on levels ``input_offset + j`` with ``k`` photons in the auxiliary mode."""
        return cls({(j + input_offset, k): c for j, c in enumerate(coefficients)}, cap)

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.amplitudes.values())

    def apply(self, bs: BeamSplitter) -> "TwoModeFockVector":
        out: dict[tuple[int, int], complex] = {}
        for (ma, mb), amp in self.amplitudes.items():
            total = ma + mb
            for pa in range(total + 1):
                pb = total - pa
                out[(pa, pb)] = out.get((pa, pb), 0j) + amp * two_mode_amplitude(
                    pa, pb, ma, mb, bs, self.cap
                )
        return TwoModeFockVector(out, self.cap)

    def auxiliary_distribution(self) -> dict[int, float]:
        """Probability of each photon count in the auxiliary mode."""
        probs: dict[int, float] = {}
        for (_, pb), amp in self.amplitudes.items():
            probs[pb] = probs.get(pb, 0.0) + abs(amp) ** 2
        return dict(sorted(probs.items()))


def outcome_probabilities(
    coefficients: Sequence[float], input_offset: int, k: int, bs: BeamSplitter, cap: int = PHOTON_CAP
) -> dict[int, float]:
    """Detection statistics for every count ``n``, lossy outcomes included."""
    state = TwoModeFockVector.from_signal(coefficients, input_offset, k, cap)
    return state.apply(bs).auxiliary_distribution()


@dataclass(frozen=True, eq=False)
class ElementPolynomial:
    """Fast evaluator for the real factors of one element.

    Factor ``j`` is ``t**tp[j] * r**rp * Q_j(eta)`` times the element phase
    ``i**rp``, where ``Q_j`` has exact integer coefficients scaled by the
    Fock normalisation. Used by the vectorised solver;
    :func:`conditional_map_oracle` stays the reference path.
    """

    input_offset: int
    k: int
    n: int
    t_parity: tuple[int, int, int]
    r_parity: int
    coefficients: tuple[np.ndarray, np.ndarray, np.ndarray]
    derivatives: tuple[np.ndarray, np.ndarray, np.ndarray]

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Factors with shape ``(3, *t.shape)``, not sign-normalised."""
        t = np.asarray(t, dtype=float)
        eta = t * t
        r = np.sqrt(np.clip(1.0 - eta, 0.0, None))
        rfac = r if self.r_parity else 1.0
        return np.stack(
            [(t if tp else 1.0) * rfac * _polyval(eta, c) for tp, c in zip(self.t_parity, self.coefficients)]
        )

    def evaluate_with_derivative(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        eta = t * t
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(np.clip(1.0 - eta, 0.0, None))
            dr = -t / r
        vals = np.empty((3,) + t.shape)
        ders = np.empty((3,) + t.shape)
        for j, (tp, c) in enumerate(zip(self.t_parity, self.coefficients)):
            q = _polyval(eta, c)
            dq = _polyval(eta, self.derivatives[j]) * 2 * t
            if tp:
                tf, dtf = t, 1.0
            else:
                tf, dtf = 1.0, 0.0
            if self.r_parity:
                vals[j] = tf * r * q
                ders[j] = (dtf * r + tf * dr) * q + tf * r * dq
            else:
                vals[j] = tf * q
                ders[j] = dtf * q + tf * dq
        return vals, ders


def _polyval(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Horner evaluation, ascending coefficients."""
    acc = np.full_like(x, c[-1]) if len(c) else np.zeros_like(x)
    for a in c[-2::-1]:
        acc = acc * x + a
    return acc


@lru_cache(maxsize=None)
def element_polynomial(input_offset: int, k: int, n: int, cap: int = PHOTON_CAP) -> ElementPolynomial:
    """Collect :func:`two_mode_amplitude`'s expansion into polynomials in ``eta``."""
    _check_element(input_offset, k, n)
    r_parity = (k - n) % 2
    t_par, coefs = [], []
    for j in range(3):
        m_a, m_b = j + input_offset, k
        p_a, p_b = j + input_offset + k - n, n
        _check_counts((p_a, p_b, m_a, m_b), cap)
        terms = _monomial_terms(p_a, m_a, m_b)
        tp_parity = (m_a + m_b - r_parity) % 2
        degree = (m_a + m_b) // 2 + 1
        q = [0] * (degree + 1)
        for coef, tp, cp in terms:
            sign = -1 if ((cp - r_parity) // 2) % 2 else 1
            # t**tp = t**tp_parity * eta**(tp // 2); r**cp = r**r_parity * (1 - eta)**(cp // 2)
            h = cp // 2
            for i in range(h + 1):
                q[tp // 2 + i] += sign * coef * math.comb(h, i) * (-1) ** i
        norm = math.sqrt(
            (math.factorial(p_a) * math.factorial(p_b)) / (math.factorial(m_a) * math.factorial(m_b))
        )
        t_par.append(tp_parity)
        coefs.append(np.trim_zeros(np.array(q, dtype=float), "b") * norm if any(q) else np.zeros(1))
    ders = tuple(np.polynomial.polynomial.polyder(c) for c in coefs)
    return ElementPolynomial(input_offset, k, n, tuple(t_par), r_parity, tuple(coefs), ders)  # type: ignore[arg-type]
