import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import expm_oracle
from nsgate.checks import branch_norms, expm_suite, unitarity_suite
from nsgate.errors import InvalidDetectionError, LossyBranchError, PhotonCapError
from nsgate.fock import (
    BeamSplitter,
    ModeState,
    TwoModeFockVector,
    canonical_phase,
    conditional_map_oracle,
    element_polynomial,
    outcome_probabilities,
    raw_element_factors,
    strip_phase,
    two_mode_amplitude,
)

amplitudes = st.floats(-0.99, 0.99).filter(lambda t: abs(t) > 0.01)
states = st.tuples(*[st.floats(-1, 1)] * 3).filter(lambda c: sum(x * x for x in c) > 1e-3)


def test_identity_splitter():
    bs = BeamSplitter(1.0)
    assert two_mode_amplitude(2, 1, 2, 1, bs) == 1
    assert two_mode_amplitude(3, 0, 2, 1, bs) == 0


def test_single_reflection():
    assert two_mode_amplitude(1, 0, 0, 1, BeamSplitter(0.6)) == pytest.approx(0.8j)


def test_hong_ou_mandel_zero():
    assert abs(two_mode_amplitude(1, 1, 1, 1, BeamSplitter.from_eta(0.5))) < 1e-15


def test_mismatched_totals_are_exact_zero():
    assert two_mode_amplitude(2, 2, 1, 1, BeamSplitter(0.3)) == 0j


def test_photon_cap():
    with pytest.raises(PhotonCapError):
        two_mode_amplitude(7, 6, 7, 6, BeamSplitter(0.5))
    with pytest.raises(PhotonCapError):
        two_mode_amplitude(2, 2, 2, 2, BeamSplitter(0.5), cap=3)


def test_matches_matrix_exponential():
    res = expm_suite()
    assert res.ok, res.failures[:3]


def test_keep_one_at_half():
    m = conditional_map_oracle(0, 1, 1, BeamSplitter.from_eta(0.5))
    assert m.factors == pytest.approx((math.sqrt(0.5), 0.0, -math.sqrt(0.125)), abs=1e-12)
    assert m.f1 == 0.0


def test_identity_keep_two():
    m = conditional_map_oracle(0, 2, 2, BeamSplitter(1.0))
    assert m.factors == (1.0, 1.0, 1.0)
    assert m.input_offset == m.output_offset == 0


def test_add_one_at_three_quarters():
    # The third factor is eta * sqrt(3 (1 - eta)), confirmed by expm below.
    bs = BeamSplitter.from_eta(0.75)
    m = conditional_map_oracle(0, 1, 0, bs)
    assert m.factors == pytest.approx((0.5, 0.6123724356957946, 0.75 * math.sqrt(0.75)), abs=1e-12)
    assert m.factors == pytest.approx(tuple(expm_oracle.element(0, 1, 0, bs.t)), abs=1e-12)
    assert m.output_offset == 1


def test_raw_phase_for_added_photon():
    raw = raw_element_factors(0, 1, 0, BeamSplitter.from_eta(0.75))
    assert all(z.real == 0 and z.imag > 0 for z in raw)
    assert conditional_map_oracle(0, 1, 0, BeamSplitter.from_eta(0.75)).removed_phase_power == 1


def test_canonical_phase_examples():
    assert strip_phase([0.5j, 0.2j, -0.1j]) == ((0.5, 0.2, -0.1), 1)
    m = canonical_phase([-0.3, 0.3, 0.3])
    assert m.factors == (0.3, -0.3, -0.3)
    assert canonical_phase([0, -0.2j, 0.1j]).factors == (0.0, 0.2, -0.1)
    assert canonical_phase([0, 0, 0]).factors == (0.0, 0.0, 0.0)


def test_lossy_and_invalid_detection():
    bs = BeamSplitter(0.5)
    with pytest.raises(LossyBranchError):
        conditional_map_oracle(0, 0, 1, bs)
    with pytest.raises(LossyBranchError):
        conditional_map_oracle(1, 1, 3, bs)
    with pytest.raises(InvalidDetectionError):
        conditional_map_oracle(0, 1, 4, bs)


def test_mode_state_apply():
    m = conditional_map_oracle(0, 1, 0, BeamSplitter.from_eta(0.75))
    out = m.apply(ModeState(0.6, 0.8, 0.0))
    assert out.offset == 1
    assert (out.alpha, out.beta) == pytest.approx((0.3, 0.8 * 0.6123724356957946))
    with pytest.raises(ValueError):
        m.apply(ModeState(1, 0, 0, offset=1))


def test_unitarity_suite():
    res = unitarity_suite()
    assert res.passed == 2000 and res.ok


@settings(max_examples=60, deadline=None)
@given(t=amplitudes, c=states, offset=st.integers(0, 1), k=st.integers(0, 4))
def test_outcome_probabilities_sum_to_one(t, c, offset, k):
    c = np.array(c) / np.linalg.norm(c)
    bs = BeamSplitter(t)
    probs = outcome_probabilities(c, offset, k, bs)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)
    # branch norms from the diagonal maps agree with the full propagation
    norms = branch_norms(c, offset, k, bs)
    for n, p in probs.items():
        assert norms[n] == pytest.approx(p, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(t=amplitudes, offset=st.integers(0, 1), k=st.integers(0, 4), n=st.integers(0, 6))
def test_sign_of_t_flips_alternate_factors(t, offset, k, n):
    if n - k > offset or n > k + offset + 2:
        return
    plus = np.array(conditional_map_oracle(offset, k, n, BeamSplitter(abs(t))).factors)
    minus = np.array(conditional_map_oracle(offset, k, n, BeamSplitter(-abs(t))).factors)
    np.testing.assert_allclose(np.abs(plus), np.abs(minus), atol=1e-12)
    flip = np.array([1, -1, 1])
    assert np.allclose(minus, plus * flip, atol=1e-12) or np.allclose(minus, -plus * flip, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(t=amplitudes, offset=st.integers(0, 1), k=st.integers(0, 4), n=st.integers(0, 6))
def test_bookkeeping_and_polynomial_agree(t, offset, k, n):
    if n - k > offset or n > k + offset + 2:
        return
    m = conditional_map_oracle(offset, k, n, BeamSplitter(t))
    assert m.output_offset - m.input_offset == k - n
    poly = element_polynomial(offset, k, n).evaluate(np.array([t]))[:, 0]
    raw = raw_element_factors(offset, k, n, BeamSplitter(t))
    phase = 1j ** ((k - n) % 2)
    np.testing.assert_allclose([z / phase for z in raw], poly, atol=1e-11)


def test_symmetric_zero_only_at_half():
    for eta in (0.3, 0.5, 0.7):
        f1 = conditional_map_oracle(0, 1, 1, BeamSplitter.from_eta(eta)).f1
        assert (abs(f1) < 1e-15) == (eta == 0.5)


def test_fock_vector_rejects_bad_states():
    with pytest.raises(PhotonCapError):
        TwoModeFockVector({(10, 5): 1.0})
    with pytest.raises(ValueError):
        TwoModeFockVector({(-1, 0): 1.0})


def test_splitter_validation():
    with pytest.raises(ValueError):
        BeamSplitter(1.5)
    with pytest.raises(ValueError):
        BeamSplitter(0.5, eta=0.3)
    assert BeamSplitter.from_eta(0.5, sign=-1).t < 0
