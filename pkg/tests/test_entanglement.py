import math

import numpy as np
import pytest

from ne_uncertainty import entanglement, fock, gaussian, measures, states
from ne_uncertainty.entanglement import HEISENBERG, NE_VIOLATION, UNDETECTED, UNPHYSICAL
from ne_uncertainty.errors import ModeMismatch, NumericInconsistency

from corpus import separable_fixture, tmsv, tmsv_moments


SEPARABLE = [separable_fixture(s) for s in range(50)]
# twelve levels per mode cannot meet the default tail tolerance
SMALL_TOL = 1e-6


class TestPartialTranspose:
    def test_flips_momentum_of_b(self):
        m = tmsv_moments(0.4)
        t = entanglement.pt_covariance(m)
        assert t.cov[0, 2] == m.cov[0, 2] and t.cov[1, 3] == -m.cov[1, 3]

    def test_single_mode_rejected(self):
        with pytest.raises(ModeMismatch):
            entanglement.pt_covariance(gaussian.moments_of(fock.vacuum(4)))

    def test_matches_fock_transpose(self):
        rho = states.cat_thermal_tms(0.8, 0.2, 0.3, 20, trunc_tol=1e-4)
        via_state = gaussian.moments_of(fock.partial_transpose_B(rho), 1e-4, check=False)
        via_cov = entanglement.pt_covariance(gaussian.moments_of(rho, 1e-4))
        assert np.max(np.abs(via_state.cov - via_cov.cov)) < 1e-10


class TestSimonDuan:
    @pytest.mark.parametrize("r", [0.1, 0.3, 0.6])
    def test_tmsv_oracle(self, r):
        nu = entanglement.simon_duan(tmsv_moments(r)).nu_tilde
        assert nu[1] == pytest.approx(math.exp(-2 * r) / 2, abs=1e-6)
        fock_nu = entanglement.simon_duan(gaussian.moments_of(tmsv(r, 30), 1e-9)).nu_tilde
        assert fock_nu[1] == pytest.approx(math.exp(-2 * r) / 2, abs=1e-6)

    @pytest.mark.parametrize("r", [0.0, 0.1, 0.3, 0.6])
    def test_detects_exactly_positive_squeezing(self, r):
        assert entanglement.simon_duan(tmsv_moments(r)).detected == (r > 0)

    def test_product_thermal(self):
        m = gaussian.moments_of(fock.tensor(fock.thermal_state(0.2, 16, 1e-8), fock.thermal_state(0.4, 16, 1e-6)), 1e-6)
        v = entanglement.simon_duan(m)
        assert not v.detected and v.branch == UNDETECTED


class TestNECriterion:
    def test_tmsv_decided_by_covariance(self):
        v = entanglement.ne_criterion(tmsv(0.3, 24))
        assert v.detected and v.branch == HEISENBERG and v.mu_b is None

    def test_product_thermal_undetected(self):
        rho = fock.tensor(fock.thermal_state(0.1, 14, 1e-6), fock.thermal_state(0.2, 14, 1e-5))
        v = entanglement.ne_criterion(rho, trunc_tol=SMALL_TOL)
        assert v.branch == UNDETECTED and v.margin >= -1e-6

    def test_single_mode_rejected(self):
        with pytest.raises(ModeMismatch):
            entanglement.ne_criterion(fock.thermal_state(0.1, 10, 1e-3))

    def test_extra_detection_at_zero_amplitude(self):
        cell = entanglement.evaluate_cell(0.0, 0.35, 0.3)
        assert not cell.simon_duan.detected
        assert cell.ne.branch == NE_VIOLATION and cell.ne.margin < -1e-3

    def test_verdict_stable_under_larger_cutoff(self):
        a = entanglement.evaluate_cell(0.0, 0.5, 0.8, cutoffs=(24,))
        b = entanglement.evaluate_cell(0.0, 0.5, 0.8, cutoffs=(28,))
        assert a.ne.branch == b.ne.branch == NE_VIOLATION
        assert a.ne.margin == pytest.approx(b.ne.margin, abs=1e-4)

    def test_normal_form_self_check(self):
        rho = states.cat_thermal_tms(1.0, 0.5, 0.2, 20, trunc_tol=1e-3)
        m_tilde = entanglement.pt_covariance(gaussian.moments_of(rho, 1e-3))
        sigma, wl = entanglement.transformed_mode_b(rho, m_tilde)
        cov = gaussian.moments_of(sigma, check=False).cov
        assert np.max(np.abs(cov - wl.nu[1] * np.eye(2))) < 1e-4

    def test_self_check_raises(self):
        rho = states.cat_thermal_tms(1.0, 0.5, 0.2, 20, trunc_tol=1e-3)
        with pytest.raises(NumericInconsistency):
            entanglement.ne_criterion(rho, trunc_tol=1e-3, self_check_tol=0.0)

    def test_negative_superfidelity_maps_to_unphysical(self, monkeypatch):
        def refuse(*_):
            raise measures.GSquaredNegative("forced", -0.1)

        monkeypatch.setattr(measures, "superfidelity", refuse)
        rho = fock.tensor(fock.thermal_state(0.1, 12, 1e-5), fock.number_state(1, 12).density())
        v = entanglement.ne_criterion(rho, trunc_tol=SMALL_TOL)
        assert v.detected and v.branch == UNPHYSICAL and v.g_squared_negative

    def test_strong_mode_is_at_least_as_sharp(self):
        for rho in SEPARABLE[:6] + [states.cat_thermal_tms(0.5, 0.5, 0.1, 20, trunc_tol=1e-3)]:
            v = entanglement.ne_criterion(rho, strong=True, trunc_tol=1e-3)
            if v.strong_rhs is None:
                continue
            assert v.strong_rhs >= v.rhs - 1e-7
            if v.detected:
                assert v.strong_detected

    def test_strong_mode_off_by_default(self):
        v = entanglement.ne_criterion(SEPARABLE[0], trunc_tol=SMALL_TOL)
        assert v.strong_detected is None and v.criterion == "ne-weak"


@pytest.mark.parametrize("seed", range(50))
def test_separable_fixtures_undetected(seed):
    rho = SEPARABLE[seed]
    assert fock.check_truncation(rho).passes(SMALL_TOL)
    v = entanglement.ne_criterion(rho, trunc_tol=SMALL_TOL)
    assert not v.detected, v
    assert not entanglement.simon_duan(gaussian.moments_of(rho, SMALL_TOL)).detected


def test_covariance_branch_matches_simon_duan():
    fixtures = SEPARABLE[:10] + [tmsv(r, 24) for r in (0.05, 0.2, 0.5)]
    fixtures += [states.cat_thermal_tms(a, n, r, 20, trunc_tol=1e-3) for a, n, r in
                 [(1.0, 0.0, 0.3), (1.0, 2.0, 0.2), (0.0, 0.3, 0.35), (0.5, 1.0, 0.5)]]
    for rho in fixtures:
        m = gaussian.moments_of(rho, 1e-3)
        sd = entanglement.simon_duan(m)
        ne = entanglement.ne_criterion(rho, trunc_tol=1e-3)
        assert sd.detected == (ne.branch == HEISENBERG)


class TestSweep:
    def test_zero_coupling_column(self):
        cells = entanglement.criterion_sweep(1.0, [0.0], [0.0, 0.5, 1.0])
        assert all(c.ne.branch == UNDETECTED and not c.simon_duan.detected for c in cells)

    def test_detection_monotone_in_squeezing(self):
        rs = np.round(np.arange(0, 0.81, 0.1), 10)
        cells = entanglement.criterion_sweep(0.0, rs, [0.5])
        flags = [c.ne.detected for c in cells]
        assert flags == sorted(flags)

    def test_order_and_parallel_agree(self):
        rs, ns = [0.0, 0.4], [0.2, 1.0]
        serial = entanglement.criterion_sweep(1.0, rs, ns)
        assert [(c.r, c.nbar) for c in serial] == [(0.0, 0.2), (0.0, 1.0), (0.4, 0.2), (0.4, 1.0)]
        assert entanglement.criterion_sweep(1.0, rs, ns, jobs=2) == serial

    def test_exact_moment_shortcut(self):
        cell = entanglement.evaluate_cell(1.0, 1.2, 0.0)
        assert cell.cutoff is None and cell.ne.branch == HEISENBERG and cell.simon_duan.detected

    def test_failed_cell_is_marked(self):
        cell = entanglement.evaluate_cell(1.0, 0.3, 3.0, cutoffs=(10,))
        assert cell.failed and "truncation" in cell.error
