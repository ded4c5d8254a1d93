"""Block propagators, analytic field derivative, and dynamical QFI."""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from iksea.dynamics import (
    block_propagator,
    dynamical_qfi,
    evolve_block,
    propagator_derivative,
    qfi_time_series,
)
from iksea.errors import EvolutionOverflowError, ParameterError
from iksea.ground import block_ground_state
from iksea.model import ChainParams, block_elements, block_matrix, momentum_grid

BROKEN = ChainParams(h=0.5, gamma=0.5, k_ksea=0.2, n_sites=8)
UNBROKEN = ChainParams(h=1.5, gamma=0.5, k_ksea=0.2, n_sites=8)


def _broken_phi(params):
    for phi in momentum_grid(params.n_sites):
        if block_elements(params, float(phi))[3] < 0:
            return float(phi)
    raise AssertionError("no broken mode on this grid")


def test_propagator_matches_dense_expm():
    rng = np.random.default_rng(2)
    for _ in range(60):
        p = ChainParams(h=rng.uniform(0.2, 2.0), gamma=rng.uniform(0.0, 0.9),
                        k_ksea=rng.uniform(0.0, 0.9), n_sites=8)
        phi = float(rng.uniform(0.1, np.pi - 0.1))
        t = float(rng.uniform(0.1, 8.0))
        _, _, _, eps_sq = block_elements(p, phi)
        if abs(eps_sq) * t * t > 1e4:   # keep expm well-conditioned
            continue
        u = block_propagator(p, phi, t).matrix
        ref = expm(-1j * t * block_matrix(p, phi).astype(complex))
        np.testing.assert_allclose(u, ref, rtol=1e-10, atol=1e-12)


def test_propagator_is_unimodular():
    # the block is traceless, so det U = exp(-i t tr H) = 1 on every branch;
    # round-off in the determinant grows with the matrix magnitude squared
    for p in (BROKEN, UNBROKEN):
        for phi in momentum_grid(p.n_sites):
            for t in (0.5, 3.0, 20.0):
                _, _, _, eps_sq = block_elements(p, float(phi))
                if math.sqrt(abs(eps_sq)) * t > 30:
                    continue
                u = block_propagator(p, float(phi), t).matrix
                scale = max(1.0, float(np.abs(u).max()) ** 2)
                np.testing.assert_allclose(np.linalg.det(u), 1.0, rtol=0,
                                           atol=1e-13 * scale)


def test_propagator_composition():
    for p in (BROKEN, UNBROKEN):
        phi = float(momentum_grid(p.n_sites)[1])
        for t1, t2 in ((0.3, 0.9), (1.5, 2.5), (4.0, 6.0)):
            u1 = block_propagator(p, phi, t1).matrix
            u2 = block_propagator(p, phi, t2).matrix
            u12 = block_propagator(p, phi, t1 + t2).matrix
            scale = max(1.0, float(np.abs(u12).max()))
            np.testing.assert_allclose(u2 @ u1, u12, rtol=1e-9,
                                       atol=1e-9 * scale)


def test_exceptional_block_is_still_evolvable():
    # a defective block (eps_sq = 0) nilpotent in H: U = I - i t H exactly
    h = -float(np.cos(np.pi / 4))
    p = ChainParams(h=h, gamma=0.4, k_ksea=0.4, n_sites=4)
    phi = np.pi / 4
    t = 3.7
    u = block_propagator(p, phi, t).matrix
    hm = block_matrix(p, phi).astype(complex)
    np.testing.assert_allclose(u, np.eye(2) - 1j * t * hm, rtol=0, atol=1e-14)
    ref = expm(-1j * t * hm)
    np.testing.assert_allclose(u, ref, rtol=0, atol=1e-12)


def test_analytic_derivative_matches_fd():
    rng = np.random.default_rng(9)
    for _ in range(60):
        p = ChainParams(h=rng.uniform(0.2, 2.0), gamma=rng.uniform(0.0, 0.9),
                        k_ksea=rng.uniform(0.0, 0.9), n_sites=8)
        phi = float(rng.uniform(0.1, np.pi - 0.1))
        t = float(rng.uniform(0.1, 5.0))
        _, _, _, eps_sq = block_elements(p, phi)
        if math.sqrt(abs(eps_sq)) * t > 20:
            continue
        da = propagator_derivative(p, phi, t, mode="analytic")
        df = propagator_derivative(p, phi, t, mode="fd", fd_step=1e-6)
        scale = max(1.0, float(np.abs(da).max()))
        np.testing.assert_allclose(da, df, rtol=1e-6, atol=1e-7 * scale)


def test_derivative_rejects_unknown_mode():
    with pytest.raises(ParameterError):
        propagator_derivative(UNBROKEN, 0.5, 1.0, mode="complex-step")


def test_series_coefficients_match_exact_forms_near_seams():
    # c0/c1 switch to Taylor at |z| = 1e-8, c2 at |z| = 1e-3; just outside
    # each seam the trig evaluation must match the truncated series, i.e.
    # switching methods never produces a jump
    from iksea.dynamics import _c012
    for z in (1.5e-8, -1.5e-8):
        c0, c1, _ = _c012(z)
        s0 = 1.0 - z / 2.0 + z * z / 24.0 - z ** 3 / 720.0
        s1 = 1.0 - z / 6.0 + z * z / 120.0 - z ** 3 / 5040.0
        np.testing.assert_allclose([c0, c1], [s0, s1], rtol=1e-14)
    for z in (1.5e-3, -1.5e-3):
        _, _, c2 = _c012(z)
        s2 = -1.0 / 3.0 + z / 30.0 - z * z / 840.0 + z ** 3 / 45360.0
        np.testing.assert_allclose(c2, s2, rtol=0, atol=5e-13)


def test_hermitian_limit_preserves_norm():
    p = ChainParams(h=1.2, gamma=0.0, k_ksea=0.6, n_sites=8)
    for phi in momentum_grid(8):
        for t in (0.7, 3.0, 15.0):
            st = evolve_block(p, float(phi), t)
            np.testing.assert_allclose(st.raw_norm, 1.0, rtol=0, atol=1e-10)
            np.testing.assert_allclose(st.norm_factor * st.raw_norm, 1.0,
                                       rtol=0, atol=1e-12)
            np.testing.assert_allclose(np.linalg.norm(st.state), 1.0,
                                       rtol=0, atol=1e-12)


def test_norm_factor_inverts_raw_norm_on_broken_branch():
    phi = _broken_phi(BROKEN)
    st = evolve_block(BROKEN, phi, 12.0)
    assert st.raw_norm > 1.0   # broken modes amplify the vacuum component
    np.testing.assert_allclose(st.norm_factor * st.raw_norm, 1.0, rtol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(st.state), 1.0, rtol=1e-12)


def test_long_time_broken_mode_converges_to_dominant_eigenvector():
    phi = _broken_phi(BROKEN)
    st = evolve_block(BROKEN, phi, 50.0)
    gs = block_ground_state(BROKEN, phi)
    target = gs.vector() / np.sqrt(gs.dirac_norm)
    overlap = abs(np.vdot(target, st.state))
    assert overlap >= 1.0 - 1e-8


def test_qfi_zero_at_time_zero():
    assert dynamical_qfi(BROKEN, 0.0) == 0.0
    assert dynamical_qfi(UNBROKEN, 0.0) == 0.0


def test_dynamical_qfi_frozen_value():
    p = ChainParams(h=0.5, gamma=0.5, k_ksea=0.2, n_sites=6)
    np.testing.assert_allclose(dynamical_qfi(p, 2.0), 2.8279624133461745,
                               rtol=1e-12)


def test_analytic_vs_fd_qfi():
    for p in (BROKEN, UNBROKEN, ChainParams(h=1.2, gamma=0.0, k_ksea=0.6,
                                            n_sites=8)):
        for t in (0.5, 2.0, 5.0):
            a = dynamical_qfi(p, t, derivative="analytic")
            f = dynamical_qfi(p, t, derivative="fd")
            np.testing.assert_allclose(a, f, rtol=1e-6, atol=1e-9)


def test_qfi_time_series_shape_and_nonnegativity():
    ts = np.linspace(0.0, 20.0, 41)
    series = qfi_time_series(UNBROKEN, ts)
    assert series.times.shape == series.values.shape == (41,)
    assert series.values[0] == 0.0
    assert np.all(series.values >= 0.0)
    assert series.derivative == "analytic"
    assert series.params == UNBROKEN


def test_overflow_raises_named_error():
    phi = _broken_phi(BROKEN)
    r = math.sqrt(-block_elements(BROKEN, phi)[3])
    t_bad = 720.0 / r
    with pytest.raises(EvolutionOverflowError):
        block_propagator(BROKEN, phi, t_bad)
    with pytest.raises(EvolutionOverflowError):
        dynamical_qfi(BROKEN, t_bad)
    # the fd derivative has no rescaled frame, so it overflows much earlier
    with pytest.raises(EvolutionOverflowError):
        dynamical_qfi(BROKEN, 500.0 / r, derivative="fd")


def test_broken_mode_plateau_up_to_cosh_cutoff():
    # N=2 has a single mode; these parameters put it on the broken branch,
    # so the total IS the saturating mode and the rescaled frame keeps the
    # plateau representable for |eps| t anywhere below the cosh cutoff
    p = ChainParams(h=0.1, gamma=0.9, k_ksea=0.1, n_sites=2)
    phi = float(momentum_grid(2)[0])
    eps_sq = block_elements(p, phi)[3]
    assert eps_sq < 0
    r = math.sqrt(-eps_sq)
    ref = dynamical_qfi(p, 80.0 / r)
    for rt in (99.0, 101.0, 300.0, 690.0):
        val = dynamical_qfi(p, rt / r)
        np.testing.assert_allclose(val, ref, rtol=1e-9)
