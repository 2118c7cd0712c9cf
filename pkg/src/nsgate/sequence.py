"""Concatenated splitter sequences and their composed diagonal maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .errors import (
    DegenerateMapError,
    LossyBranchError,
    NotAGateError,
    ResidualToleranceError,
    SequenceParseError,
)
from .fock import BeamSplitter, ConditionalMap, ModeState, conditional_map_oracle

ElementMap = Callable[[int, int, int, float], ConditionalMap]


def oracle_map(input_offset: int, k: int, n: int, t: float) -> ConditionalMap:
    return conditional_map_oracle(input_offset, k, n, BeamSplitter(t))


@dataclass(frozen=True, order=True)
class ElementSpec:
    """Splitter with ``k`` photons injected into, and ``n`` detected at, the auxiliary mode."""

    k: int
    n: int

    def __post_init__(self):
        if self.k < 0 or self.n < 0:
            raise ValueError(f"photon counts must be >= 0, got ({self.k},{self.n})")

    @property
    def shift(self) -> int:
        return self.k - self.n

    def __str__(self) -> str:
        return f"({self.k},{self.n})"


@dataclass(frozen=True, order=True)
class SequenceSpec:
    elements: tuple[ElementSpec, ...]
    start_offset: int = 0

    def __post_init__(self):
        els = tuple(e if isinstance(e, ElementSpec) else ElementSpec(*e) for e in self.elements)
        object.__setattr__(self, "elements", els)
        off = self.start_offset
        for i, e in enumerate(els):
            off += e.shift
            if off < 0:
                raise LossyBranchError(
                    f"element {i} {e} leaves the running offset at {off} in {self}"
                )

    @classmethod
    def of(cls, *pairs: tuple[int, int], start_offset: int = 0) -> "SequenceSpec":
        return cls(tuple(ElementSpec(k, n) for k, n in pairs), start_offset)

    @classmethod
    def parse(cls, text: str, start_offset: int = 0) -> "SequenceSpec":
        return cls(tuple(ElementSpec(k, n) for k, n in parse_pairs(text)), start_offset)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[ElementSpec]:
        return iter(self.elements)

    def __str__(self) -> str:
        return ",".join(str(e) for e in self.elements)

    @property
    def offsets(self) -> list[int]:
        """Offset entering each element, followed by the final offset."""
        out = [self.start_offset]
        for e in self.elements:
            out.append(out[-1] + e.shift)
        return out

    @property
    def net_offset(self) -> int:
        return sum(e.shift for e in self.elements)

    @property
    def photon_preserving(self) -> bool:
        return all(e.k == e.n for e in self.elements)


def parse_pairs(text: str) -> list[tuple[int, int]]:
    """Parse ``"(1,1),(0,0)"``; whitespace is ignored, outer brackets optional."""
    pos = 0
    n = len(text)

    def skip():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def expect(ch: str):
        nonlocal pos
        skip()
        if pos >= n:
            raise SequenceParseError(f"expected {ch!r} but input ended", pos)
        if text[pos] != ch:
            raise SequenceParseError(f"expected {ch!r}, found {text[pos]!r}", pos)
        pos += 1

    def integer() -> int:
        nonlocal pos
        skip()
        start = pos
        while pos < n and text[pos].isdigit():
            pos += 1
        if start == pos:
            found = repr(text[pos]) if pos < n else "end of input"
            raise SequenceParseError(f"expected a photon count, found {found}", pos)
        return int(text[start:pos])

    skip()
    bracketed = pos < n and text[pos] == "["
    if bracketed:
        pos += 1
    pairs = []
    while True:
        expect("(")
        k = integer()
        expect(",")
        m = integer()
        expect(")")
        pairs.append((k, m))
        skip()
        if pos < n and text[pos] == ",":
            pos += 1
            continue
        break
    if bracketed:
        expect("]")
    skip()
    if pos != n:
        raise SequenceParseError(f"unexpected {text[pos]!r}", pos)
    return pairs


@dataclass(frozen=True)
class ComposedMap:
    F0: float
    F1: float
    F2: float
    net_offset: int
    element_amplitudes: tuple[float, ...]
    element_maps: tuple[ConditionalMap, ...] = field(default=(), compare=False, repr=False)

    @property
    def factors(self) -> tuple[float, float, float]:
        return (self.F0, self.F1, self.F2)


def compose(
    seq: SequenceSpec, amps: Sequence[float], element_map: ElementMap = oracle_map
) -> ComposedMap:
    """Chain the per-element conditional maps, threading the photon offset."""
    if len(amps) != len(seq):
        raise ValueError(f"{len(amps)} amplitudes for a {len(seq)}-element sequence")
    F = [1.0, 1.0, 1.0]
    maps = []
    off = seq.start_offset
    for e, t in zip(seq, amps):
        m = element_map(off, e.k, e.n, float(t))
        maps.append(m)
        F = [a * b for a, b in zip(F, m.factors)]
        off = m.output_offset
    return ComposedMap(F[0], F[1], F[2], off - seq.start_offset, tuple(float(t) for t in amps), tuple(maps))


def ns_residuals(cmap: ComposedMap) -> tuple[float, float]:
    """``(F1/F0 - 1, F2/F0 + 1)``; both vanish exactly for an NS gate."""
    if cmap.net_offset != 0:
        raise NotAGateError(f"net photon shift {cmap.net_offset}; an NS gate must return to offset 0")
    if cmap.F0 == 0:
        raise DegenerateMapError("F0 == 0: the vacuum component is annihilated")
    return (cmap.F1 / cmap.F0 - 1.0, cmap.F2 / cmap.F0 + 1.0)


def success_probability(cmap: ComposedMap, tol: float = 1e-6) -> float:
    """Heralding probability ``F0**2``, which is state independent only at an NS solution."""
    r1, r2 = ns_residuals(cmap)
    if math.hypot(r1, r2) > tol:
        raise ResidualToleranceError(
            f"residuals ({r1:.3g}, {r2:.3g}) exceed {tol:g}; probability would depend on the input"
        )
    return cmap.F0**2


def branch_probability(cmap: ComposedMap, state: ModeState, tol: float = 1e-9) -> float:
    if not state.is_normalized(tol):
        raise ValueError(f"state norm^2 {state.norm_squared} is not 1")
    return cmap.F0**2 * state.alpha**2 + cmap.F1**2 * state.beta**2 + cmap.F2**2 * state.gamma**2
