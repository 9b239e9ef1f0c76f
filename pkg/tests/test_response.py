import numpy as np
import pytest
from numpy.testing import assert_allclose

from rotor_spectra import (NoiseGenerator, alpha_response, build_band_model,
                           eigenvector_response, laplacian_generator, limit_basis,
                           order_check, projection_expansion, response_data,
                           second_order_eigenvalue, spectrum, w_epsilon)
from rotor_spectra.errors import EigsNotSimple, EpsZero, GammaViolated, NonOrthogonal
from rotor_spectra.response import first_order_basis


def fd_eigendata(model, gen, k, eps, pred):
    """Independent finite-difference oracle: eig + assignment to predictions."""
    d = np.diag(np.exp(-2j * np.pi * k * model.alpha))
    lam, vec = np.linalg.eig(d @ (np.eye(model.N) + eps * np.asarray(gen.wdot)))
    order = []
    used = set()
    for p in pred:
        cand = sorted(range(model.N), key=lambda i: abs(lam[i] - p))
        nxt = next(i for i in cand if i not in used)
        used.add(nxt)
        order.append(nxt)
    vec = vec[:, order] / np.linalg.norm(vec[:, order], axis=0, keepdims=True)
    return lam[order], vec


def fd_vector_response(model, gen, k, ell, basis, eps):
    """(aligned f_eps - f)/eps, projected onto the complement of f."""
    pred = np.exp(-2j * np.pi * k * model.alpha) + eps * basis.lambda_hat
    _, vec = fd_eigendata(model, gen, k, eps, pred)
    f = basis.vectors[:, ell].astype(complex)
    v = vec[:, ell]
    ip = np.vdot(f, v)
    v = v * abs(ip) / ip
    w = (v - f) / eps
    return w - np.vdot(f, w) * f


class TestEigenvectorResponse:
    def test_single_band_zero(self):
        m = build_band_model([0.3], [4])
        g = laplacian_generator(4)
        assert np.all(eigenvector_response(m, g, 3, 1) == 0)

    def test_k0_zero(self, case_model, case_gen):
        assert np.all(eigenvector_response(case_model, case_gen, 0, 5) == 0)

    def test_two_band_hand_value(self, two_band_model, two_band_gen):
        # finite-difference verified: the limit of (aligned f_eps - e1)/eps
        fhat = eigenvector_response(two_band_model, two_band_gen, 1, 0)
        assert_allclose(fhat, [0.0, -(1 + 1j) / 4], atol=1e-14)

    def test_matches_fd_oracle_width2_bands(self):
        m = build_band_model([0.1, 0.35], [2, 1])
        g = laplacian_generator(3)
        basis = limit_basis(m, g, 1)
        for ell in range(3):
            fhat = eigenvector_response(m, g, 1, ell, basis)
            fd1 = fd_vector_response(m, g, 1, ell, basis, 1e-4)
            fd2 = fd_vector_response(m, g, 1, ell, basis, 5e-5)
            assert_allclose(2 * fd2 - fd1, fhat, atol=1e-6)

    def test_gauge_orthogonality_sweep(self, case_model, case_gen):
        basis = limit_basis(case_model, case_gen, 1)
        for ell in (0, 5, 11, 18, 32):
            fhat = eigenvector_response(case_model, case_gen, 1, ell, basis)
            f = basis.vectors[:, ell].astype(complex)
            assert abs(np.vdot(f, fhat)) <= 1e-12

    def test_support_structure(self, case_model, case_gen):
        # in-band part lies in span{f_r: r in band, r != ell}, rest outside
        basis = limit_basis(case_model, case_gen, 1)
        ell = 0
        fhat = eigenvector_response(case_model, case_gen, 1, ell, basis)
        coeffs = basis.vectors.T @ fhat
        assert abs(coeffs[ell]) <= 1e-12

    def test_gamma_violated(self):
        m = build_band_model([0.0, 0.5], [1, 1])
        g = laplacian_generator(2)
        with pytest.raises(GammaViolated):
            eigenvector_response(m, g, 2, 0)


class TestSecondOrderEigenvalue:
    def test_single_band_zero(self):
        m = build_band_model([0.3], [4])
        assert second_order_eigenvalue(m, laplacian_generator(4), 2, 0) == 0

    def test_two_band_hand_value(self, two_band_model, two_band_gen):
        # Richardson-extrapolation verified second-order Taylor coefficient
        lhh = second_order_eigenvalue(two_band_model, two_band_gen, 1, 0)
        assert_allclose(lhh, -(1 + 1j) / 8, atol=1e-14)

    def test_matches_richardson_width2(self):
        m = build_band_model([0.1, 0.35], [2, 1])
        g = laplacian_generator(3)
        basis = limit_basis(m, g, 1)
        lam0 = np.exp(-2j * np.pi * m.alpha)
        for ell in range(3):
            lhh = second_order_eigenvalue(m, g, 1, ell, basis)
            vals = []
            for eps in (1e-3, 5e-4):
                pred = lam0 + eps * basis.lambda_hat
                lam, _ = fd_eigendata(m, g, 1, eps, pred)
                vals.append((lam[ell] - lam0[ell] - eps * basis.lambda_hat[ell]) / eps ** 2)
            assert abs((2 * vals[1] - vals[0]) - lhh) <= 1e-6


class TestResponseData:
    def test_case_study_table(self, case_model, case_gen):
        resp = response_data(case_model, case_gen, 1)
        assert resp.lambda_hat.shape == (33,)
        assert np.all(np.abs(resp.lambda_hathat) > 0)
        # fhat of a band-1 label is supported on bands 2, 3 plus the band-1
        # complement of its own vector
        fhat0 = resp.f_hat[:, 0]
        assert np.linalg.norm(fhat0[11:]) > 0

    def test_s1_all_zero(self):
        m = build_band_model([0.3], [4])
        resp = response_data(m, laplacian_generator(4), 2)
        assert np.all(resp.lambda_hathat == 0)
        assert np.all(resp.f_hat == 0)

    def test_ray_preservation(self, case_model, case_gen):
        # first order only shrinks magnitude: argument of e + eps*lhat is fixed
        resp = response_data(case_model, case_gen, 1)
        eps = 1e-3
        for ell in (0, 11, 18):
            e = np.exp(-2j * np.pi * case_model.beta[resp.band[ell]])
            z = e + eps * resp.lambda_hat[ell]
            assert abs(z) < 1.0
            d = (np.angle(z) - np.angle(e)) % (2 * np.pi)
            assert min(d, 2 * np.pi - d) <= 1e-12


class TestProjectionExpansion:
    def test_rank_one_at_eps0(self):
        f = np.array([1.0, 0.0])
        p = projection_expansion(f, np.zeros(2), 0.0)
        assert_allclose(p, [[1, 0], [0, 0]], atol=0)

    def test_fhat_zero_constant(self):
        f = np.array([0.0, 1.0])
        p = projection_expansion(f, np.zeros(2), 0.7)
        assert_allclose(p, np.outer(f, f), atol=0)

    def test_two_band_matches_true_projector(self, two_band_model, two_band_gen):
        eps = 1e-3
        basis = limit_basis(two_band_model, two_band_gen, 1)
        fhat = eigenvector_response(two_band_model, two_band_gen, 1, 0, basis)
        approx = projection_expansion(basis.vectors[:, 0], fhat, eps)
        spec = spectrum(two_band_model, two_band_gen, 1, eps)
        v = spec.vectors[:, 0]
        true = np.outer(v, v.conj())
        assert np.linalg.norm(approx - true) < eps ** 1.5

    def test_non_orthogonal(self):
        with pytest.raises(NonOrthogonal):
            projection_expansion([1.0, 0.0], [0.5, 0.5], 0.1)


class TestOrderCheck:
    def test_exactness_single_band(self):
        # first order is the whole expansion when S = 1
        m = build_band_model([0.3], [5])
        g = laplacian_generator(5)
        oc = order_check(m, g, 3, 2, [1e-1, 1e-2, 1e-3, 1e-4])
        assert np.max(oc.r1) <= 1e-12
        assert np.max(oc.r2) <= 1e-12

    def test_exactness_k0(self, case_model, case_gen):
        oc = order_check(case_model, case_gen, 0, 4, [1e-1, 1e-2, 1e-3, 1e-4])
        assert np.max(oc.r1) <= 1e-12

    def test_two_band_slopes(self, two_band_model, two_band_gen):
        oc = order_check(two_band_model, two_band_gen, 1, 0, [1e-2, 1e-3, 1e-4, 1e-5])
        assert oc.slope0 == pytest.approx(1.0, abs=0.05)
        assert oc.slope1 == pytest.approx(2.0, abs=0.05)
        assert oc.slope2 >= 2.5
        assert oc.slope_vec > 1.0

    def test_case_study_vec_slope(self, case_model, case_gen):
        oc = order_check(case_model, case_gen, 1, 0, [1e-2, 1e-3, 1e-4, 1e-5])
        assert oc.slope_vec > 1.0

    def test_grid_validation(self, two_band_model, two_band_gen):
        with pytest.raises(ValueError):
            order_check(two_band_model, two_band_gen, 1, 0, [1e-2, 1e-3, 1e-4])
        with pytest.raises(ValueError):
            order_check(two_band_model, two_band_gen, 1, 0, [5.0, 1e-2, 1e-3, 1e-4])


class TestFirstOrderBasis:
    def test_k0_uses_full_generator(self, case_model, case_gen):
        v, lam_hat, band = first_order_basis(case_model, case_gen, 0)
        rho = np.linalg.eigvalsh(np.asarray(case_gen.wdot))
        assert_allclose(np.sort(lam_hat.real), np.sort(rho), atol=1e-12)
        # vectors diagonalise Wdot globally, no band support here
        resid = np.asarray(case_gen.wdot) @ v - lam_hat.real[None, :] * v
        assert np.max(np.abs(resid)) <= 1e-12


class TestAlphaResponse:
    def test_zero_direction(self, two_band_model, two_band_gen):
        dlam, df = alpha_response(two_band_model, two_band_gen, 1, 0.01, 0,
                                  np.zeros(2))
        assert dlam == 0
        assert_allclose(df, 0.0, atol=1e-14)

    def test_scalar_case(self):
        m = build_band_model([0.37], [1])
        g = NoiseGenerator.from_matrix([[0.0]])
        dlam, df = alpha_response(m, g, 2, 0.5, 0, [1.0])
        want = -2j * np.pi * 2 * np.exp(-2j * np.pi * 2 * 0.37)
        assert_allclose(dlam, want, atol=1e-14)
        assert_allclose(df, 0.0, atol=1e-14)

    def test_matches_central_differences(self, two_band_model, two_band_gen):
        m, g = two_band_model, two_band_gen
        eps, k = 0.01, 1
        u = np.array([1.0, 0.0])
        dlam, df = alpha_response(m, g, k, eps, 0, u)
        w = w_epsilon(g, eps)
        for h in (1e-5, 1e-6):
            def eig_at(shift):
                a = m.alpha + shift * u
                lam, vec = np.linalg.eig(np.diag(np.exp(-2j * np.pi * k * a)) @ w)
                i = int(np.argmin(np.abs(lam - 1)))
                v = vec[:, i] / np.linalg.norm(vec[:, i])
                return lam[i], v
            lp, vp = eig_at(h)
            lm, vm = eig_at(-h)
            fd_lam = (lp - lm) / (2 * h)
            assert abs(fd_lam - dlam) <= 1e-4 * abs(dlam)
            _, f0 = eig_at(0.0)
            align = lambda v: v * abs(np.vdot(f0, v)) / np.vdot(f0, v)
            fd_df = (align(vp) - align(vm)) / (2 * h)
            fd_df = fd_df - np.vdot(f0, fd_df) * f0
            # df is gauge-fixed to <f, df> = 0 with f phase-fixed by the library;
            # compare the gauge-free components
            f = spectrum(m, g, k, eps).vectors[:, 0]
            df_perp = df - np.vdot(f, df) * f
            fd_perp = fd_df - np.vdot(f, fd_df) * f
            assert np.linalg.norm(fd_perp - df_perp) <= 1e-4 * np.linalg.norm(df_perp)

    def test_linear_system_residual(self, case_model, case_gen):
        u = np.zeros(33)
        u[4] = 1.0
        eps, k, ell = 0.05, 1, 0
        dlam, df = alpha_response(case_model, case_gen, k, eps, ell, u)
        spec = spectrum(case_model, case_gen, k, eps)
        p = np.diag(np.exp(-2j * np.pi * k * case_model.alpha)) @ w_epsilon(case_gen, eps)
        dp = np.diag(-2j * np.pi * k * u * np.exp(-2j * np.pi * k * case_model.alpha)) \
            @ w_epsilon(case_gen, eps)
        f = spec.vectors[:, ell]
        resid = (p - spec.lam[ell] * np.eye(33)) @ df + (dp - dlam * np.eye(33)) @ f
        assert np.linalg.norm(resid) <= 1e-10 * (np.linalg.norm(dp, 2) + abs(dlam))

    def test_eps_zero_refused(self, two_band_model, two_band_gen):
        with pytest.raises(EpsZero):
            alpha_response(two_band_model, two_band_gen, 1, 0.0, 0, [1.0, 0.0])

    def test_eigs_not_simple(self):
        m = build_band_model([0.1, 0.2], [1, 1])
        g = NoiseGenerator.from_matrix(np.zeros((2, 2)))
        with pytest.raises(EigsNotSimple):
            alpha_response(m, g, 0, 0.5, 0, [1.0, 0.0])
