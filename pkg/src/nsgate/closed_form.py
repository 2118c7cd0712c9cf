"""Closed-form conditional maps in terms of the transmitivity ``eta``.

Four families, each written with ``xi = (1 - eta) / eta``:

* :func:`map_keep` -- inject and detect ``k`` photons, offset 0 -> 0;
* :func:`map_add` -- inject ``k``, detect ``k - 1``, offset 0 -> 1;
* :func:`map_remove` -- inject ``k``, detect ``k + 1``, offset 1 -> 0;
* :func:`map_keep_offset1` -- inject and detect ``k``, offset 1 -> 1.

These are transcribed literally, including their combinatorial
prefactors. They agree with :func:`nsgate.fock.conditional_map_oracle` for
``k <= 1`` on the photon-preserving families; ``tests/test_closed_form.py``
pins down where and how the other cases differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import LossyBranchError
from .fock import ConditionalMap, canonical_phase


@dataclass(frozen=True)
class EtaXi:
    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta={self.eta} outside (0, 1]; xi is undefined at eta=0")

    @property
    def xi(self) -> float:
        return (1.0 - self.eta) / self.eta


def _falling(k: int, m: int) -> int:
    """k (k-1) ... (k-m+1); zero once a factor vanishes."""
    return math.perm(k, m) if k >= m else 0


def _build(factors, input_offset, k, n, eta) -> ConditionalMap:
    return canonical_phase(factors, input_offset, k, n, math.sqrt(eta))


def map_keep(k: int, eta: float) -> ConditionalMap:
    if k < 0:
        raise ValueError("k must be >= 0")
    xi = EtaXi(eta).xi
    s = math.sqrt(eta)
    f0 = s**k
    f1 = s ** (k + 1) * (1 - k * xi)
    f2 = s ** (k + 2) * (1 - 2 * k * xi + k * (k - 1) * xi**2)
    return _build((f0, f1, f2), 0, k, k, eta)


def map_add(k: int, eta: float) -> ConditionalMap:
    if k < 1:
        raise ValueError("map_add needs k >= 1: cannot detect -1 photons")
    e = EtaXi(eta)
    xi, s, loss = e.xi, math.sqrt(eta), 1.0 - eta
    if k == 1:
        f0 = math.sqrt(loss)
        f1 = math.sqrt(2 * eta * loss)
        f2 = eta * math.sqrt(3 * loss / 2)
    else:
        kk = k * (k - 1)
        f0 = math.sqrt(kk * loss) * s ** (k - 1)
        f1 = math.sqrt(2 * kk * loss) * s**k * (1 - (k - 1) * xi / 2)
        f2 = (
            math.sqrt(1.5 * kk * loss)
            * s ** (k + 1)
            * (1 - (k - 1) * xi + (k - 1) * (k - 2) * xi**2 / 3)
        )
    return _build((f0, f1, f2), 0, k, k - 1, eta)


def map_remove(k: int, eta: float, input_offset: int = 1) -> ConditionalMap:
    if k < 0:
        raise ValueError("k must be >= 0")
    if input_offset < 1:
        raise LossyBranchError("removing a photon from an offset-0 beam discards the vacuum component")
    e = EtaXi(eta)
    xi, s, loss = e.xi, math.sqrt(eta), 1.0 - eta
    if k == 0:
        f0 = math.sqrt(loss)
        f1 = math.sqrt(2 * eta * loss)
        f2 = math.sqrt(6 * loss) * eta
    else:
        g = (k + 1) / k
        f0 = math.sqrt(loss * g) * s**k
        f1 = math.sqrt(2 * loss * g) * s ** (k + 1) * (1 - k * xi / 2)
        f2 = math.sqrt(6 * loss * g) * s ** (k + 2) * (1 - k * xi + k * (k - 1) * xi**2 / 6)
    return _build((f0, f1, f2), 1, k, k + 1, eta)


def map_keep_offset1(k: int, eta: float) -> ConditionalMap:
    if k < 0:
        raise ValueError("k must be >= 0")
    xi = EtaXi(eta).xi
    s = math.sqrt(eta)
    f0 = s ** (k + 1) * (1 - k * xi)
    f1 = s ** (k + 2) * (1 - 2 * k * xi + k * (k - 1) * xi**2)
    f2 = s ** (k + 3) * (1 - 3 * k * xi + 3 * k * (k - 1) * xi**2 - _falling(k, 3) * xi**3)
    return _build((f0, f1, f2), 1, k, k, eta)


def closed_form_map(input_offset: int, k: int, n: int, t: float) -> ConditionalMap:
    """Closed-form map for a signed amplitude, as a drop-in for the oracle.

    Flipping the sign of ``t`` multiplies factor ``j`` by ``(-1)**j`` up to a
    global sign (every element has the same parity structure), so the sign is
    attached to ``f1``. Only the four displayed families are available.
    """
    if t == 0:
        raise ValueError("closed forms are undefined at t=0")
    eta = t * t
    if input_offset == 0 and n == k:
        m = map_keep(k, eta)
    elif input_offset == 0 and n == k - 1:
        m = map_add(k, eta)
    elif input_offset == 1 and n == k + 1:
        m = map_remove(k, eta)
    elif input_offset == 1 and n == k:
        m = map_keep_offset1(k, eta)
    else:
        raise NotImplementedError(f"no closed form for element ({k},{n}) at offset {input_offset}")
    sign = 1.0 if t > 0 else -1.0
    return canonical_phase((m.f0, sign * m.f1, m.f2), input_offset, k, n, t)
