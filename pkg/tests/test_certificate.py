import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasesync.certificate import build_certificate, certify
from phasesync.hermitian import HermitianMatrix, quad_form
from phasesync.model import PhaseVector, assemble_instance, random_signal, sample_wigner
from phasesync.solver import SolverOptions, solve_second_order, spectral_init

from reference import jacobi_eigvalsh


def _instance(n, sigma, seed):
    z = random_signal(n, seed)
    w = sample_wigner(n, seed)
    return assemble_instance(z, w, sigma, seed)


def _solved(n, sigma, seed):
    inst = _instance(n, sigma, seed)
    rep = solve_second_order(inst.C, spectral_init(inst.C), signal=inst.z)
    return inst, rep


class TestBuildCertificate:
    def test_structure_off_diagonal_and_diagonal(self):
        inst = _instance(8, 0.6, 1)
        x = random_signal(8, 2)
        s = build_certificate(inst.C, x)
        off = s.mat + inst.C.mat
        np.fill_diagonal(off, 0.0)
        assert np.abs(off).max() <= 1e-14
        w = inst.C.mat @ x.vec
        expect_diag = (w * x.vec.conj()).real - np.diag(inst.C.mat).real
        assert np.abs(np.diag(s.mat).real - expect_diag).max() <= 1e-12

    def test_sum_with_data_is_diagonal(self):
        inst = _instance(10, 1.2, 3)
        x = random_signal(10, 4)
        s = build_certificate(inst.C, x)
        total = s.mat + inst.C.mat
        off_mask = ~np.eye(10, dtype=bool)
        assert np.abs(total[off_mask]).max() <= 1e-14

    @given(st.integers(0, 2**31 - 1))
    def test_quadratic_form_at_base_point_vanishes(self, seed):
        # x* S x = 0 identically, critical point or not: the diagonal of S
        # is built to cancel x* C x exactly.
        inst = _instance(7, 0.9, seed)
        x = random_signal(7, seed + 1)
        s = build_certificate(inst.C, x)
        assert abs(quad_form(s, x.vec)) <= 1e-10 * 7

    @given(st.integers(0, 2**31 - 1))
    def test_residual_is_half_gradient_norm(self, seed):
        # S x is the tangent gradient over two: its radial part cancels by
        # the same diagonal construction.
        from phasesync.manifold import riemannian_grad
        inst = _instance(7, 1.1, seed)
        x = random_signal(7, seed + 2)
        s = build_certificate(inst.C, x)
        sx = np.linalg.norm(s.mat @ x.vec)
        g = riemannian_grad(inst.C, x)
        assert 2.0 * sx == pytest.approx(g.norm(), rel=1e-10, abs=1e-12)

    def test_size_mismatch(self):
        inst = _instance(6, 0.5, 5)
        with pytest.raises(ValueError):
            build_certificate(inst.C, random_signal(7, 0))


class TestCertifyNoiseless:
    def test_planted_point_certifies_rank_n_minus_1(self):
        inst = _instance(30, 0.0, 11)
        report = certify(inst.C, inst.z)
        assert report.tight
        assert report.unique
        assert report.residual <= 1e-9 * 30
        assert abs(report.min_eig) <= 1e-12 * 30
        assert report.second_eig == pytest.approx(30.0, rel=1e-9)
        assert report.error is None

    def test_spectrum_matches_jacobi_oracle(self):
        inst = _instance(8, 0.0, 13)
        s = build_certificate(inst.C, inst.z)
        ref = jacobi_eigvalsh(np.asarray(s.mat))
        # Exact spectrum of n I - z z* (restricted off the diagonal shift):
        # one zero and n - 1 copies of n, up to rounding.
        assert abs(ref[0]) <= 1e-12 * 8
        assert np.abs(ref[1:] - 8.0).max() <= 1e-10
        report = certify(inst.C, inst.z)
        assert report.min_eig == pytest.approx(ref[0], abs=1e-10)
        assert report.second_eig == pytest.approx(ref[1], abs=1e-10)


class TestCertifySolved:
    def test_theorem_regime_certifies(self):
        n = 100
        sigma = 0.5 * n**0.25 / 18.0
        inst, rep = _solved(n, sigma, 17)
        assert rep.converged
        report = certify(inst.C, rep.x)
        assert report.tight
        assert report.unique
        assert report.diag_min >= -1e-10

    def test_diag_min_near_one_at_weak_noise(self):
        # S_ii = x* C x row contribution minus 1; at the optimum of a weakly
        # noisy instance each row holds roughly n - 1 aligned unit terms.
        inst, rep = _solved(50, 0.1, 19)
        report = certify(inst.C, rep.x)
        assert report.diag_min >= 0.5 * 50

    def test_deep_noise_fails_psd(self):
        # sigma far above sqrt(n): the relaxation is no longer tight at the
        # solver's point, so the certificate must go indefinite.
        inst, rep = _solved(30, 10.0, 23)
        report = certify(inst.C, rep.x)
        assert not report.tight
        assert report.min_eig < 0.0

    def test_noncritical_point_fails_residual(self):
        inst = _instance(40, 0.3, 29)
        far = random_signal(40, 999)
        report = certify(inst.C, far)
        assert report.residual > 1e-9 * 40
        assert not report.tight
        assert not report.unique


class TestCertifyValidation:
    def test_tolerance_signs(self):
        inst = _instance(6, 0.2, 31)
        with pytest.raises(ValueError):
            certify(inst.C, inst.z, residual_tol=-1e-9)
        with pytest.raises(ValueError):
            certify(inst.C, inst.z, psd_tol=1e-14)
        with pytest.raises(ValueError):
            certify(inst.C, inst.z, rank_tol=0.0)

    def test_unique_implies_tight(self):
        for seed in range(6):
            inst, rep = _solved(20, 1.0, seed)
            report = certify(inst.C, rep.x)
            assert not report.unique or report.tight

    @given(st.integers(0, 2**31 - 1), st.sampled_from([0.0, 0.4, 2.0]))
    @settings(max_examples=18)
    def test_report_is_phase_invariant(self, seed, sigma):
        inst, rep = _solved(15, sigma, seed)
        rotated = PhaseVector(rep.x.vec * np.exp(2.1j))
        a = certify(inst.C, rep.x)
        b = certify(inst.C, rotated)
        assert a.tight == b.tight
        assert a.unique == b.unique
        assert a.min_eig == pytest.approx(b.min_eig, abs=1e-10 * 15)
