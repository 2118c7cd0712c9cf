import itertools
import math

import pytest

from nsgate import closed_form as cf
from nsgate.errors import IncompatibleBranchesError, NotACorrectionError
from nsgate.feedforward import (
    CANDIDATE_PAIRS,
    REFERENCE_ROWS,
    CorrectionProblem,
    correction_search,
    feedforward_reports,
    main_gate,
    match_reference,
    total_gate_probability,
)
from nsgate.sequence import SequenceSpec, compose, ns_residuals


def _pair(text):
    return SequenceSpec.parse(text, start_offset=1)


def test_problem_validation():
    with pytest.raises(NotACorrectionError):
        CorrectionProblem(0.5, _pair("(1,1),(1,1)"))
    with pytest.raises(NotACorrectionError):
        CorrectionProblem(0.5, SequenceSpec.parse("(0,0),(1,1)"))
    with pytest.raises(ValueError):
        CorrectionProblem(1.0, _pair("(0,1),(0,0)"))
    assert str(CorrectionProblem(0.5, _pair("(1,2),(0,0)")).chain) == "(1,0),(1,2),(0,0)"


@pytest.mark.parametrize(
    "eta1,pair,expected",
    [
        (0.9197, "(1,2),(0,0)", (0.1472, 0.5137, 0.0202)),
        (0.9197, "(0,1),(1,1)", (0.2947, 0.2567, 0.0145)),
    ],
)
def test_reference_corrections(eta1, pair, expected, config):
    sols = correction_search(CorrectionProblem(eta1, _pair(pair)), config)
    best = sols[0]
    assert best.etas[0] == pytest.approx(eta1, abs=1e-12)
    assert best.etas[1:] == pytest.approx(expected[:2], abs=1e-3)
    assert best.P == pytest.approx(expected[2], abs=5e-4)


def test_table_probabilities_recompose(table_rows):
    for row in table_rows:
        s = row.solution
        cmap = compose(s.sequence, s.amplitudes)
        assert s.P == pytest.approx(cmap.F0**2, abs=1e-15)
        assert math.hypot(*ns_residuals(cmap)) < 1e-8


def test_table_covers_both_eta1_for_last_chain(table_rows):
    chain = "(1,0),(1,1),(1,2)"
    eta1s = {round(r.problem.eta1, 4) for r in table_rows if str(r.problem.chain) == chain}
    assert {0.2265, 0.9197} <= eta1s


def test_correction_families_at_gate_a_eta(table_rows):
    # At the gate-A transmitivity two pair families correct the error appreciably.
    families = {str(r.problem.pair) for r in table_rows if r.problem.eta1 == 0.2265}
    assert families == {"(1,1),(0,1)", "(1,1),(1,2)"}


@pytest.mark.parametrize("ref", REFERENCE_ROWS[4:], ids=lambda r: f"{r.sequence}@{r.eta1}")
def test_reference_rows_fail_only_the_beta_condition(ref):
    # At the reference transmitivities P and F2/F0 = -1 hold, F1/F0 = 1 does not,
    # with the exact maps and with the closed forms alike.
    seq = SequenceSpec.parse(ref.sequence)
    for element_map in (None, cf.closed_form_map):
        kw = {} if element_map is None else {"element_map": element_map}
        best = min(
            (
                compose(seq, (math.sqrt(ref.eta1), s2 * math.sqrt(ref.eta2), s3 * math.sqrt(ref.eta3)), **kw)
                for s2, s3 in itertools.product((1, -1), repeat=2)
            ),
            key=lambda c: abs(ns_residuals(c)[1]),
        )
        r1, r2 = ns_residuals(best)
        assert abs(r2) < 5e-4
        assert best.F0**2 == pytest.approx(ref.probability, abs=5e-5)
        assert abs(r1) > 0.1


def test_reference_rows_matched(table_rows):
    matches = match_reference(table_rows)
    assert len(matches) == 7 and all(m.row is not None for m in matches)
    for m in matches[:4]:
        assert max(map(abs, m.deltas)) < 1e-4


def test_freezing_is_well_conditioned(config):
    pair = _pair("(1,2),(0,0)")
    base = correction_search(CorrectionProblem(0.9197, pair), config)[0]
    for dt in (-1e-3, 1e-3):
        eta1 = (math.sqrt(0.9197) + dt) ** 2
        moved = correction_search(CorrectionProblem(eta1, pair), config)[0]
        assert abs(moved.P - base.P) < 5e-3


def test_total_probability_arithmetic(config):
    main = main_gate(SequenceSpec.parse("(1,1),(1,1)"), 0.9197, config)
    assert main.etas[0] == pytest.approx(0.9197, abs=5e-4)
    assert total_gate_probability(main).total == main.P
    corr = correction_search(CorrectionProblem(main.etas[0], _pair("(1,2),(0,0)")), config)[0]
    report = total_gate_probability(main, corr)
    assert report.total == pytest.approx(main.P + corr.P)
    off = correction_search(CorrectionProblem(0.9, _pair("(1,2),(0,0)")), config)[0]
    with pytest.raises(IncompatibleBranchesError):
        total_gate_probability(main, off)
    with pytest.raises(IncompatibleBranchesError):
        total_gate_probability(corr, None)


def test_feedforward_reports_bounded(config):
    for report in feedforward_reports(config):
        assert 0.2265 < report.total < 0.25
        assert report.total > report.main.P


def test_candidate_pairs_all_valid():
    assert len(CANDIDATE_PAIRS) == 8
    for pair in CANDIDATE_PAIRS:
        CorrectionProblem(0.5, pair)
