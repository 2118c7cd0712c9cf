"""Feed-forward correction of the (1,0) error at the first splitter.

When an NS gate whose first element is (1,1) instead registers zero photons
at the first detector, a photon has been added to the signal beam. The
beam is rerouted into a two-element correction pair that removes it again
and completes the NS transformation. The two first-detector outcomes are
exclusive, so the correction's probability adds to the main gate's.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .errors import IncompatibleBranchesError, LossyBranchError, NotACorrectionError
from .sequence import ElementSpec, SequenceSpec
from .solver import GateSolution, SolverConfig, solve_ns

ERROR_ELEMENT = ElementSpec(1, 0)
APPRECIABLE = 1e-4

CANDIDATE_PAIRS = tuple(
    SequenceSpec.parse(s, start_offset=1)
    for s in (
        "(0,1),(0,0)",
        "(0,1),(1,1)",
        "(1,2),(0,0)",
        "(1,2),(1,1)",
        "(0,0),(0,1)",
        "(1,1),(0,1)",
        "(0,0),(1,2)",
        "(1,1),(1,2)",
    )
)
FIRST_SPLITTER_ETAS = (0.2265, 0.9197, 0.2275)


@dataclass(frozen=True)
class ReferenceRow:
    """Expected three-splitter correction result, used for regression deltas."""

    sequence: str
    eta1: float
    eta2: float
    eta3: float
    probability: float


REFERENCE_ROWS = (
    ReferenceRow("(1,0),(0,1),(1,1)", 0.9197, 0.2947, 0.2567, 0.0145),
    ReferenceRow("(1,0),(1,2),(0,0)", 0.9197, 0.1472, 0.5137, 0.0202),
    ReferenceRow("(1,0),(1,2),(1,1)", 0.9197, 0.1511, 0.8398, 0.0173),
    ReferenceRow("(1,0),(0,0),(1,2)", 0.9197, 0.5137, 0.1472, 0.0104),
    ReferenceRow("(1,0),(1,1),(0,1)", 0.9197, 0.6500, 0.4182, 0.0042),
    ReferenceRow("(1,0),(1,1),(1,2)", 0.2265, 0.3315, 0.0531, 0.0088),
    ReferenceRow("(1,0),(1,1),(1,2)", 0.9197, 0.8690, 0.1766, 0.0127),
)


@dataclass(frozen=True)
class CorrectionProblem:
    eta1: float
    pair: SequenceSpec

    def __post_init__(self):
        if not 0.0 < self.eta1 < 1.0:
            raise ValueError(f"eta1={self.eta1} outside (0, 1)")
        if len(self.pair) != 2 or self.pair.net_offset != -1 or self.pair.start_offset != 1:
            raise NotACorrectionError(
                f"correction pair {self.pair} must have two elements and remove one photon"
            )
        try:
            self.chain
        except LossyBranchError as exc:
            raise NotACorrectionError(str(exc)) from exc

    @property
    def chain(self) -> SequenceSpec:
        return SequenceSpec((ERROR_ELEMENT,) + self.pair.elements)


def correction_search(problem: CorrectionProblem, config: SolverConfig | None = None) -> list[GateSolution]:
    """NS solutions of ``(1,0)`` followed by the pair with the first amplitude frozen at ``+sqrt(eta1)``.

    Flipping the sign of any one amplitude acts the same way on the composed
    map, so the pair's sign freedom covers the frozen splitter's.
    """
    return solve_ns(problem.chain, config, fixed={0: math.sqrt(problem.eta1)})


@dataclass(frozen=True)
class FeedForwardReport:
    main: GateSolution
    correction: GateSolution | None
    total: float


def total_gate_probability(
    main: GateSolution, correction: GateSolution | None = None, tol: float = 1e-6
) -> FeedForwardReport:
    if len(main.sequence) != 2 or main.sequence.elements[0] != ElementSpec(1, 1):
        raise IncompatibleBranchesError(f"main gate {main.sequence} must be two elements starting with (1,1)")
    if correction is None:
        return FeedForwardReport(main, None, main.probability)
    if correction.sequence.elements[0] != ERROR_ELEMENT:
        raise IncompatibleBranchesError(f"correction {correction.sequence} must start with (1,0)")
    if abs(main.etas[0] - correction.etas[0]) > tol:
        raise IncompatibleBranchesError(
            f"first splitter differs: eta={main.etas[0]:.9g} vs {correction.etas[0]:.9g}"
        )
    return FeedForwardReport(main, correction, main.probability + correction.probability)


@dataclass(frozen=True)
class TableRow:
    problem: CorrectionProblem
    solution: GateSolution
    rank: int
    n_classes: int


def _search_job(args: tuple[CorrectionProblem, SolverConfig | None]) -> list[GateSolution]:
    return correction_search(*args)


def table1_report(
    config: SolverConfig | None = None,
    workers: int = 1,
    eta1_values: Sequence[float] = FIRST_SPLITTER_ETAS,
    pairs: Sequence[SequenceSpec] = CANDIDATE_PAIRS,
    threshold: float = APPRECIABLE,
) -> list[TableRow]:
    """All correction solutions with ``P >= threshold``, in (eta1, pair, P) order."""
    problems = [CorrectionProblem(e, p) for e in eta1_values for p in pairs]
    jobs = [(p, config) for p in problems]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_search_job, jobs))
    else:
        results = [_search_job(j) for j in jobs]
    rows = []
    for problem, sols in zip(problems, results):
        kept = [s for s in sols if s.probability >= threshold]
        rows.extend(TableRow(problem, s, i + 1, len(kept)) for i, s in enumerate(kept))
    return rows


@dataclass(frozen=True)
class ReferenceMatch:
    reference: ReferenceRow
    row: TableRow | None

    @property
    def deltas(self) -> tuple[float, float, float] | None:
        if self.row is None:
            return None
        e = self.row.solution.etas
        return (
            e[1] - self.reference.eta2,
            e[2] - self.reference.eta3,
            self.row.solution.probability - self.reference.probability,
        )


def match_reference(rows: Sequence[TableRow], references: Sequence[ReferenceRow] = REFERENCE_ROWS) -> list[ReferenceMatch]:
    """Pair every reference row with the closest computed solution of the same chain and eta1."""
    out = []
    for ref in references:
        cands = [
            r
            for r in rows
            if str(r.problem.chain) == ref.sequence and abs(r.problem.eta1 - ref.eta1) < 1e-12
        ]

        def dist(r: TableRow) -> float:
            e = r.solution.etas
            return max(abs(e[1] - ref.eta2), abs(e[2] - ref.eta3), abs(r.solution.probability - ref.probability))

        out.append(ReferenceMatch(ref, min(cands, key=dist) if cands else None))
    return out


MAIN_GATES = (
    (SequenceSpec.parse("(1,1),(0,0)"), 0.2265),
    (SequenceSpec.parse("(1,1),(1,1)"), 0.9197),
)


def main_gate(seq: SequenceSpec, eta1: float, config: SolverConfig | None = None) -> GateSolution:
    """Solution of a two-element gate whose first transmitivity is closest to ``eta1``."""
    sols = solve_ns(seq, config)
    if not sols:
        raise ValueError(f"{seq} has no NS solution")
    return min(sols, key=lambda s: (abs(s.etas[0] - eta1), -s.probability))


def feedforward_reports(
    config: SolverConfig | None = None,
    mains: Sequence[tuple[SequenceSpec, float]] = MAIN_GATES,
    pairs: Sequence[SequenceSpec] = CANDIDATE_PAIRS,
) -> list[FeedForwardReport]:
    """Each main gate combined with its best correction pair.

    Only one correction can follow a given error, so the best one is used.
    The correction is solved at the main gate's exact first transmitivity.
    """
    reports = []
    for seq, eta1 in mains:
        main = main_gate(seq, eta1, config)
        best = None
        for pair in pairs:
            sols = correction_search(CorrectionProblem(main.etas[0], pair), config)
            if sols and (best is None or sols[0].probability > best.probability + 1e-12):
                best = sols[0]
        reports.append(total_gate_probability(main, best))
    return reports
