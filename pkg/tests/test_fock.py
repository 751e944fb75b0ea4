import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from laguerre_mzi.closed_form import mean_total_photons, omega0, physical_phase
from laguerre_mzi.errors import DimensionError, DomainError, InvalidDensityError, TruncationError
from laguerre_mzi.fock import (
    TwoModeDensity,
    TwoModeState,
    apply_loss_channel,
    apply_number_conserving_unitary,
    beam_splitter_1,
    beam_splitter_2,
    build_laguerre_state,
    generator_block,
    ladder_tail,
    lossy_probe_family,
    mixed_state_qfi,
    mzi_identity_error,
    mzi_parity,
    number_conserving_unitary,
    parity_expectation,
    phase_shift,
    photon_moments,
    probe_state,
    pure_state_qfi,
    select_cutoff,
    squeeze_by_expm,
)
from laguerre_mzi.qfi import QfiParams, moments_closed_form, qfi_ideal, qfi_lossy


def total_photons(state: TwoModeState) -> float:
    k = np.arange(state.cutoff + 1)
    return float(np.sum(np.abs(state.amplitudes) ** 2 * (k[:, None] + k[None, :])))


def random_state(seed: int, cutoff: int = 5) -> TwoModeState:
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=(cutoff + 1, cutoff + 1)) + 1j * rng.normal(size=(cutoff + 1, cutoff + 1))
    return TwoModeState(amp / np.linalg.norm(amp))


def sector_weights(state: TwoModeState) -> np.ndarray:
    p = np.abs(state.amplitudes) ** 2
    c = state.cutoff
    return np.array([sum(p[k, N - k] for k in range(max(0, N - c), min(N, c) + 1)) for N in range(2 * c + 1)])


class TestLaguerreState:
    def test_tmsv_amplitudes(self):
        s = build_laguerre_state(0, 0.7, cutoff=40)
        m = np.arange(41)
        expected = np.tanh(0.7) ** m / np.cosh(0.7)
        np.testing.assert_allclose(np.diag(s.amplitudes).real, expected / np.linalg.norm(expected), atol=1e-15)
        assert not (s.amplitudes - np.diag(np.diag(s.amplitudes))).any()

    def test_energy_n1(self):
        s = build_laguerre_state(1, 0.7, cutoff=40)
        assert total_photons(s) == pytest.approx(2 * math.cosh(1.4) + 2 * math.sinh(0.7) ** 2, rel=1e-10)

    @pytest.mark.parametrize("n,r", [(0, 0.3), (1, 1.0), (2, 0.5), (3, 0.9)])
    def test_energy_matches_closed_form(self, n, r):
        s = build_laguerre_state(n, r, tail_tol=1e-16)
        assert total_photons(s) == pytest.approx(mean_total_photons(n, r), rel=1e-10)

    @pytest.mark.parametrize("n,r", [(2, 0.5), (0, 1.0), (1, 0.3), (3, 1.0)])
    def test_matches_matrix_exponential(self, n, r):
        cutoff = max(40, select_cutoff(n, r))
        lagu = build_laguerre_state(n, r, cutoff=cutoff)
        direct = squeeze_by_expm(TwoModeState.fock(n, n, cutoff), r)
        assert lagu.fidelity(direct) >= 1 - 1e-10

    def test_norm_within_tail(self):
        s = build_laguerre_state(2, 0.8)
        assert abs(s.norm() - 1) < 1e-14
        assert ladder_tail(2, 0.8, s.cutoff) < 1e-12

    def test_default_cutoff_is_minimal(self):
        M = select_cutoff(1, 0.7)
        assert ladder_tail(1, 0.7, M) < 1e-12 <= ladder_tail(1, 0.7, M - 1)

    def test_explicit_cutoff_too_small(self):
        with pytest.raises(TruncationError):
            build_laguerre_state(1, 0.7, cutoff=10)
        with pytest.raises(TruncationError):
            build_laguerre_state(3, 0.1, cutoff=2)

    def test_zero_squeezing_is_twin_fock(self):
        s = build_laguerre_state(2, 0.0)
        assert s.fidelity(TwoModeState.fock(2, 2)) == 1.0

    def test_negative_squeezing(self):
        with pytest.raises(DomainError):
            build_laguerre_state(1, -0.1)

    def test_json_dump(self):
        d = build_laguerre_state(0, 0.5, cutoff=20).to_json()
        assert d["cutoff"] == 20
        k, l, re, im = d["amplitudes"][0]
        assert (k, l, im) == (0, 0, 0.0)
        assert re == pytest.approx(1 / math.cosh(0.5), rel=1e-12)
        assert all(row[0] == row[1] for row in d["amplitudes"])


class TestUnitaries:
    def test_vacuum_invariant(self):
        out = apply_number_conserving_unitary(TwoModeState.fock(0, 0), "J1", math.pi / 2)
        assert out.amplitudes[0, 0] == pytest.approx(1.0)

    def test_j3_phase(self):
        phi = 0.37
        out = apply_number_conserving_unitary(TwoModeState.fock(1, 0), "J3", phi)
        assert out.amplitudes[1, 0] == pytest.approx(np.exp(-0.5j * phi), abs=1e-15)
        assert np.count_nonzero(out.amplitudes) == 1

    def test_balanced_split_of_11(self):
        out = apply_number_conserving_unitary(TwoModeState.fock(1, 1), "J1", math.pi / 2)
        block = expm(-1j * math.pi / 2 * generator_block("J1", 2))
        expected = block @ np.array([0, 1, 0])  # sector basis k = 0, 1, 2
        np.testing.assert_allclose([out.amplitudes[k, 2 - k] for k in range(3)], expected, atol=1e-14)
        assert photon_moments(out).mean_a == pytest.approx(1.0, abs=1e-14)
        # Hong-Ou-Mandel: no coincidences
        assert abs(out.amplitudes[1, 1]) < 1e-14

    def test_blocks_match_dense_exponential(self):
        for gen in ("J1", "J2", "J3"):
            for N in (1, 4, 7):
                blk = number_conserving_unitary(gen, 0.83, N).blocks[N]
                np.testing.assert_allclose(blk, expm(-0.83j * generator_block(gen, N)), atol=1e-13)

    def test_blocks_are_unitary(self):
        assert number_conserving_unitary("J1", 1.1, 30).unitarity_error() < 1e-12

    def test_j1_commutation(self):
        # [J1, J2] = i J3 on each sector
        for N in (2, 5):
            j1, j2, j3 = (generator_block(g, N) for g in ("J1", "J2", "J3"))
            np.testing.assert_allclose(j1 @ j2 - j2 @ j1, 1j * j3, atol=1e-13)

    @pytest.mark.parametrize("phi", [0.1, 0.7])
    def test_mzi_identity(self, phi):
        assert mzi_identity_error(phi, 8) <= 1e-10

    def test_dense_embedding(self):
        u = number_conserving_unitary("J1", 0.4, 6)
        d = u.dense(3)
        s = random_state(1, 3)
        # sectors above 3 are incomplete on a cutoff-3 grid; restrict to N <= 3
        mask = np.add.outer(np.arange(4), np.arange(4)) <= 3
        s = TwoModeState(np.where(mask, s.amplitudes, 0))
        via_dense = (d @ s.vector()).reshape(4, 4)
        np.testing.assert_allclose(via_dense, u.apply(s).amplitudes[:4, :4], atol=1e-14)

    def test_apply_grows_cutoff(self):
        out = beam_splitter_1(TwoModeState.fock(3, 3))
        assert out.cutoff == 6
        assert out.norm() == pytest.approx(1.0, abs=1e-14)

    def test_operator_too_small(self):
        with pytest.raises(DimensionError):
            number_conserving_unitary("J1", 0.3, 2).apply(TwoModeState.fock(2, 2))

    def test_nonfinite_angle(self):
        with pytest.raises(DomainError):
            apply_number_conserving_unitary(TwoModeState.fock(0, 1), "J1", math.inf)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**16), gen=st.sampled_from(["J1", "J2", "J3"]), angle=st.floats(-6.3, 6.3))
def test_unitaries_preserve_norm_and_sectors(seed, gen, angle):
    s = random_state(seed)
    out = apply_number_conserving_unitary(s, gen, angle)
    assert abs(out.norm() - 1) < 1e-12
    w_in = sector_weights(s.embed(out.cutoff))
    w_out = sector_weights(out)
    np.testing.assert_allclose(w_out, w_in, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(N=st.integers(0, 9), k=st.integers(0, 9), angle=st.floats(-3.0, 3.0))
def test_no_cross_sector_amplitude(N, k, angle):
    k = min(k, N)
    for gen in ("J1", "J3"):
        out = apply_number_conserving_unitary(TwoModeState.fock(k, N - k), gen, angle)
        kk, ll = np.nonzero(out.amplitudes)
        assert set((kk + ll).tolist()) <= {N}


class TestLoss:
    def test_lossless_is_identity(self):
        s = random_state(3)
        d = apply_loss_channel(s, "b", 1.0)
        np.testing.assert_array_equal(d.branches[0], s.amplitudes)
        assert d.branches.shape[0] == 1

    def test_single_photon(self):
        d = apply_loss_channel(TwoModeState.fock(0, 1), "b", 0.95)
        expected = np.zeros((4, 4))
        expected[1, 1] = 0.95  # |0,1> has flat index 1
        expected[0, 0] = 0.05
        np.testing.assert_allclose(d.matrix, expected, atol=1e-15)

    def test_mode_a(self):
        d = apply_loss_channel(TwoModeState.fock(2, 0), "a", 0.5)
        np.testing.assert_allclose(d.diagonal()[:, 0], [0.25, 0.5, 0.25], atol=1e-15)

    @pytest.mark.parametrize("T", [0.3, 0.8, 0.999])
    def test_trace_preserved(self, T):
        for mode in ("a", "b"):
            d = apply_loss_channel(random_state(7, 6), mode, T)
            assert d.trace() == pytest.approx(1.0, abs=1e-12)
            d.validate()

    def test_kraus_form_matches_definition(self):
        # K_l = sqrt((1-T)^l / l!) T^{n/2} b^l on a small space
        c, T = 4, 0.7
        s = random_state(11, c)
        b = np.diag(np.sqrt(np.arange(1, c + 1)), 1)
        Tn = np.diag(T ** (np.arange(c + 1) / 2))
        rho = np.zeros(((c + 1) ** 2,) * 2, dtype=complex)
        v = s.vector()
        for l in range(c + 1):
            K = np.kron(np.eye(c + 1), math.sqrt((1 - T) ** l / math.factorial(l)) * Tn @ np.linalg.matrix_power(b, l))
            w = K @ v
            rho += np.outer(w, w.conj())
        np.testing.assert_allclose(apply_loss_channel(s, "b", T).matrix, rho, atol=1e-14)

    def test_channels_compose(self):
        s = random_state(5)
        twice = apply_loss_channel(apply_loss_channel(s, "b", 0.9), "b", 0.8)
        once = apply_loss_channel(s, "b", 0.72)
        np.testing.assert_allclose(twice.matrix, once.matrix, atol=1e-13)

    @pytest.mark.parametrize("T", [0.0, -0.2, 1.1])
    def test_bad_transmissivity(self, T):
        with pytest.raises(DomainError):
            apply_loss_channel(TwoModeState.fock(0, 1), "b", T)

    def test_tmsv_external_parity(self):
        # n = 0 external loss reproduces sech^2 r / sqrt(omega) with the loss-modified omega
        from laguerre_mzi.closed_form import SchemeParams, parity

        s = build_laguerre_state(0, 0.7)
        for phi in (0.05, 0.3):
            oracle = mzi_parity(s, physical_phase(phi), "external", 0.95)
            assert oracle == pytest.approx(parity(SchemeParams(0, 0.7, phi, "external", 0.95)), abs=1e-10)


class TestDensity:
    def test_from_matrix_round_trip(self):
        d = apply_loss_channel(random_state(2, 3), "b", 0.6)
        again = TwoModeDensity.from_matrix(d.matrix, 3)
        np.testing.assert_allclose(again.matrix, d.matrix, atol=1e-13)

    def test_rejects_non_hermitian(self):
        m = np.zeros((4, 4), dtype=complex)
        m[0, 1] = 1
        with pytest.raises(InvalidDensityError):
            TwoModeDensity.from_matrix(m, 1)

    def test_rejects_negative(self):
        with pytest.raises(InvalidDensityError):
            TwoModeDensity.from_matrix(np.diag([1.2, -0.2, 0, 0]), 1)

    def test_validate_trace(self):
        with pytest.raises(InvalidDensityError):
            TwoModeDensity(np.full((1, 2, 2), 0.6)).validate()


class TestParity:
    def test_fock_parities(self):
        assert parity_expectation(TwoModeState.fock(0, 0)) == 1
        assert parity_expectation(TwoModeState.fock(0, 1)) == -1
        assert parity_expectation(TwoModeState.fock(3, 2), "a") == -1

    def test_tmsv_output(self):
        s = build_laguerre_state(0, 0.7)
        got = mzi_parity(s, physical_phase(0.3))
        assert got == pytest.approx(1 / math.cosh(0.7) ** 2 / math.sqrt(omega0(0.7, 0.3)), abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**16), T=st.floats(0.05, 1.0))
    def test_parity_bounded(self, seed, T):
        d = apply_loss_channel(beam_splitter_2(random_state(seed)), "b", T)
        assert abs(parity_expectation(d)) <= 1 + 1e-10

    def test_unknown_scenario(self):
        with pytest.raises(ValueError):
            mzi_parity(TwoModeState.fock(0, 0), 0.1, "sideways")


class TestMoments:
    def test_tmsv_mean(self):
        m = photon_moments(probe_state(0, 0.7))
        assert m.mean_a == pytest.approx(math.sinh(0.7) ** 2, rel=1e-10)

    def test_twin_fock_cross(self):
        m = photon_moments(beam_splitter_1(TwoModeState.fock(1, 1)))
        assert m.cross == pytest.approx(0.0, abs=1e-15)
        assert m.mean_a2 == pytest.approx(2.0, rel=1e-14)

    @pytest.mark.parametrize("n,r", [(2, 0.5), (3, 1.0), (1, 0.3), (0, 0.9)])
    def test_match_closed_form(self, n, r):
        got = photon_moments(probe_state(n, r, tail_tol=1e-16))
        for g, e in zip(got, moments_closed_form(n, r)):
            assert g == pytest.approx(e, rel=1e-10)

    @pytest.mark.parametrize("n,r", [(2, 0.5), (3, 0.8)])
    def test_insensitive_to_bs_sign(self, n, r):
        plus = photon_moments(probe_state(n, r, bs_sign=1))
        minus = photon_moments(probe_state(n, r, bs_sign=-1))
        np.testing.assert_allclose(plus, minus, rtol=1e-12)


class TestFisherInformation:
    def test_tmsv(self):
        assert pure_state_qfi(build_laguerre_state(0, 0.7)) == pytest.approx(math.sinh(1.4) ** 2, rel=1e-8)

    def test_twin_fock(self):
        assert pure_state_qfi(build_laguerre_state(1, 0.0)) == pytest.approx(4.0, rel=1e-14)

    @pytest.mark.parametrize("n,r", [(3, 0.9), (2, 0.4), (1, 1.0)])
    def test_matches_closed_form(self, n, r):
        assert pure_state_qfi(build_laguerre_state(n, r)) == pytest.approx(qfi_ideal(n, r), rel=1e-8)

    def test_mixed_equals_pure_when_lossless(self):
        lagu = build_laguerre_state(1, 0.4, cutoff=15, tail_tol=1e-5)
        exact = mixed_state_qfi(lossy_probe_family(1, 0.4, 1.0, cutoff=15), 0.2)
        assert exact == pytest.approx(pure_state_qfi(lagu), abs=1e-6)

    @pytest.mark.parametrize("n", [0, 1])
    def test_bound_holds(self, n):
        exact = mixed_state_qfi(lossy_probe_family(n, 0.5, 0.8, cutoff=15), 0.3)
        assert 0 < exact <= qfi_lossy(QfiParams(n, 0.5, 0.8)) + 1e-6

    def test_frozen_mixed_qfi(self):
        # regression values of the exact lossy QFI at cutoff 15
        assert mixed_state_qfi(lossy_probe_family(0, 0.5, 0.8, cutoff=15), 0.3) == pytest.approx(1.097167920382088, rel=1e-7)
        assert mixed_state_qfi(lossy_probe_family(1, 0.5, 0.8, cutoff=15), 0.3) == pytest.approx(9.66681886025215, rel=1e-7)

    def test_phase_independent(self):
        fam = lossy_probe_family(0, 0.5, 0.8, cutoff=15)
        assert mixed_state_qfi(fam, 0.0) == pytest.approx(mixed_state_qfi(fam, 1.2), rel=1e-6)


def test_phase_shift_commutes_with_loss_on_populations():
    s = beam_splitter_1(build_laguerre_state(1, 0.5))
    a = apply_loss_channel(phase_shift(s, 0.4), "b", 0.7)
    b = phase_shift(apply_loss_channel(s, "b", 0.7), 0.4)
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-13)
