import math

import numpy as np
import pytest

from replica_anneal import exact, fixtures
from replica_anneal.annealer import make_rng
from replica_anneal.energies import TabulatedEnergy


def test_enumerate_qbar_flat_energy_equals_mu0():
    model = TabulatedEnergy([0.0, 0.0, 0.0, 0.0], n=2)
    direct, folded, _ = exact.enumerate_qbar(model, 2, 2, beta=1.3, gamma=0.9)
    mu = exact.mu0(2, 2, 0.9)
    assert np.allclose(direct, mu, atol=1e-12)
    assert np.allclose(folded, mu, atol=1e-12)


def test_enumerate_qbar_reduces_to_gibbs_at_gamma0_y1(tiny_tabulated):
    beta = 0.7
    _, folded, _ = exact.enumerate_qbar(tiny_tabulated, 3, 1, beta, 0.0)
    w = np.exp(-beta * tiny_tabulated.table)
    assert np.allclose(folded, w / w.sum(), atol=1e-12)


def test_enumerate_qbar_hand_example():
    # N=1, y=2, gamma=1, beta=1, E(+1)=0, E(-1)=1
    model = TabulatedEnergy([1.0, 0.0], n=1)
    direct, folded, _ = exact.enumerate_qbar(model, 1, 2, beta=1.0, gamma=1.0)
    cosh2 = math.cosh(2.0)
    weights = np.array([math.exp(-2.0) * cosh2,  # (-,-) at index 0
                        math.exp(-1.0),          # (+,-)
                        math.exp(-1.0),          # (-,+)
                        cosh2])                  # (+,+) at index 3
    assert weights[3] == pytest.approx(3.76220, abs=1e-4)
    assert weights[0] == pytest.approx(0.50912, abs=1e-4)
    expected = weights / weights.sum()
    assert expected[3] == pytest.approx(0.75139, abs=1e-4)
    assert np.allclose(folded, expected, atol=1e-10)
    assert np.allclose(direct, expected, atol=1e-10)


def test_enumerate_qbar_size_limits():
    model = TabulatedEnergy(np.zeros(2), n=1)
    with pytest.raises(exact.SizeLimitError):
        exact.enumerate_qbar(model, 1, 17, 1.0, 0.0)


def test_kernel_two_state_metropolis():
    # N=1, y=1, E(+)=0, E(-)=1, gamma=0, beta=1
    model = fixtures.two_state()
    k = exact.build_kernel_matrix(model, 1, 1, beta=1.0, gamma=0.0)
    # index 0 is sigma=-1 (the high state), index 1 is sigma=+1
    expected = np.array([[0.0, 1.0], [math.exp(-1.0), 1.0 - math.exp(-1.0)]])
    assert np.allclose(k, expected, atol=1e-12)


def test_kernel_is_random_walk_at_infinite_temperature(tiny_tabulated):
    k = exact.build_kernel_matrix(tiny_tabulated, 3, 2, beta=0.0, gamma=0.0)
    size = 2**6
    off = k - np.diag(np.diag(k))
    assert np.allclose(np.diag(k), 0.0, atol=1e-12)
    assert np.allclose(off[off > 0], 1.0 / 6.0)
    assert np.allclose(k.sum(axis=1), 1.0, atol=1e-12)
    assert k.shape == (size, size)


def test_kernel_rows_stochastic(cluster4):
    for kernel in ("two-stage", "combined"):
        k = exact.build_kernel_matrix(cluster4, 4, 2, 1.2, 0.8, kernel)
        assert np.all(k >= -1e-15)
        assert np.allclose(k.sum(axis=1), 1.0, atol=1e-12)


def test_detailed_balance_both_kernels(tiny_tabulated):
    for kernel in ("two-stage", "combined"):
        for beta, gamma in [(0.0, 0.0), (0.9, 0.4), (2.0, 1.5)]:
            _, qbar, _ = exact.enumerate_qbar(tiny_tabulated, 3, 2, beta, gamma)
            k = exact.build_kernel_matrix(tiny_tabulated, 3, 2, beta, gamma, kernel)
            flux = qbar[:, None] * k
            assert np.abs(flux - flux.T).max() <= 1e-12


def test_stationary_and_gap_two_state():
    model = fixtures.two_state()
    _, qbar, _ = exact.enumerate_qbar(model, 1, 1, 1.0, 0.0)
    k = exact.build_kernel_matrix(model, 1, 1, 1.0, 0.0)
    stationary, lam1, psi = exact.stationary_and_gap(k, qbar)
    assert lam1 == pytest.approx(-math.exp(-1.0), abs=1e-12)
    assert psi == pytest.approx(1.0 + math.exp(-1.0), abs=1e-12)
    # stationary proportional to (e^{-1}, 1) in index order (-, +)
    expected = np.array([math.exp(-1.0), 1.0])
    assert np.allclose(stationary, expected / expected.sum(), atol=1e-10)


def test_gap_is_two_for_single_free_spin():
    model = TabulatedEnergy([0.0, 0.0], n=1)
    _, qbar, _ = exact.enumerate_qbar(model, 1, 1, 0.0, 0.0)
    k = exact.build_kernel_matrix(model, 1, 1, 0.0, 0.0)
    _, lam1, psi = exact.stationary_and_gap(k, qbar)
    assert lam1 == pytest.approx(-1.0, abs=1e-12)
    assert psi == pytest.approx(2.0, abs=1e-12)


def test_stationary_and_gap_rejects_nonreversible():
    qbar = np.array([0.5, 0.5])
    k = np.array([[0.9, 0.1], [0.4, 0.6]])
    with pytest.raises(exact.NonReversibleError):
        exact.stationary_and_gap(k, qbar)


def test_elevation_flat_landscape_is_zero():
    model = TabulatedEnergy(np.zeros(8), n=3)
    assert exact.compute_elevation_m(model, 3, 1) == 0.0


def test_elevation_double_well():
    # N=2, y=1: wells at 0, barrier 1 -> m = 1
    model = fixtures.double_well(2)
    assert exact.compute_elevation_m(model, 2, 1) == pytest.approx(1.0)


def test_elevation_two_state_cancels():
    # E(+)=0, E(-)=h: H(+,-) = h cancels E(-) = h, so m = 0
    model = fixtures.two_state(high=0.7)
    assert exact.compute_elevation_m(model, 1, 1) == pytest.approx(0.0)


def test_elevation_matches_bruteforce(rng):
    for n, y in [(2, 1), (1, 2), (2, 2), (4, 1)]:
        for _ in range(4):
            model = fixtures.random_integer_energies(n, rng)
            fast = exact.compute_elevation_m(model, n, y)
            slow = exact.elevation_m_bruteforce(model, n, y)
            assert fast == pytest.approx(slow, abs=1e-12)


def test_constants_B_and_Bprime():
    model = TabulatedEnergy([0.0, 0.7, 1.3, 0.0], n=2)
    consts = exact.compute_constants(model, 2, 2, gamma=3.0)
    assert consts.B == pytest.approx(0.7)
    # gamma=3, y=2: B' = log cosh 6 - log cosh 0 = 5.306859
    assert consts.Bprime == pytest.approx(5.306859, abs=1e-5)
    consts3 = exact.compute_constants(model, 2, 3, gamma=3.0)
    assert consts3.Bprime == pytest.approx(5.997525, abs=1e-5)
    assert consts3.Bprime == pytest.approx(2 * 3.0, abs=0.01)  # ~ 2 gamma
    assert 0 < consts.c <= consts.C


def test_constants_flat_energy_reports_no_B():
    model = TabulatedEnergy(np.zeros(4), n=2)
    consts = exact.compute_constants(model, 2, 1, gamma=0.5)
    assert consts.B is None


def test_n0_contains_tilde_n0(cluster4):
    consts = exact.compute_constants(cluster4, 4, 2, gamma=1.0)
    assert set(consts.tildeN0).issubset(set(consts.N0))
    # six minima aligned pairs
    assert consts.tildeN0.size == 6
    assert consts.N0.size == 36


def test_validate_schedule_azencott_passes():
    stages = [(math.log(k + 1), 2 * (k + 1)) for k in range(1, 10_001)]
    verdict = exact.validate_schedule(stages, m=1.0, kappa1=math.e)
    assert verdict.passed
    # closed form: criterion at n is -2n + n = -n
    assert verdict.final_value == pytest.approx(-10_000, rel=1e-6)


def test_validate_schedule_harmonic_fails():
    stages = [(math.log(k), 1.0) for k in range(1, 10_001)]
    verdict = exact.validate_schedule(stages, m=1.0, kappa1=math.e)
    assert not verdict.passed
    assert verdict.trailing_slope > 0


def test_validate_schedule_flat_landscape_passes():
    stages = [(1.0, 1.0)] * 200
    verdict = exact.validate_schedule(stages, m=0.0, kappa1=1.0)
    assert verdict.passed


def test_validate_schedule_empty_errors():
    with pytest.raises(ValueError):
        exact.validate_schedule([], m=1.0, kappa1=1.0)


def test_limit_distribution_flat_energy():
    model = TabulatedEnergy(np.zeros(4), n=2)
    rep = exact.limit_distribution_check(model, 2, 2, gamma=0.8)
    assert rep["mass_outside_N0"] == pytest.approx(0.0, abs=1e-15)
    assert rep["linf_conditional_vs_mu0"] <= 1e-12
    assert rep["N0_size"] == 16


def test_limit_distribution_cluster(cluster4):
    rep = exact.limit_distribution_check(cluster4, 4, 2, gamma=0.5)
    assert rep["mass_outside_N0"] <= 1e-6
    assert rep["linf_conditional_vs_mu0"] <= 1e-6
    assert rep["linf_vs_uniform_on_tildeN0"] <= 1e-6


def test_limit_distribution_gamma0_uniform_on_n0(cluster4):
    rep = exact.limit_distribution_check(cluster4, 4, 2, gamma=0.0)
    assert rep["linf_conditional_vs_mu0"] <= 1e-9  # mu0 is uniform at gamma=0


def test_dense_region_mass_gamma0_exact(cluster4):
    center = fixtures.dense_center_index(4)
    mass = exact.dense_region_mass(cluster4, 4, 2, 0.0, center, radius=1)
    assert mass == pytest.approx((5 / 6) ** 2, abs=1e-10)


def test_dense_region_mass_full_ball_is_one(cluster4):
    center = fixtures.dense_center_index(4)
    mass = exact.dense_region_mass(cluster4, 4, 2, 1.0, center, radius=4)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_dense_region_mass_amplified_at_positive_gamma(cluster4):
    center = fixtures.dense_center_index(4)
    base = exact.dense_region_mass(cluster4, 4, 2, 0.0, center, radius=1)
    for gamma in (0.25, 0.5, 1.0, 2.0, 3.0):
        assert exact.dense_region_mass(cluster4, 4, 2, gamma, center, radius=1) > base


def test_classify_minima_cluster(cluster4):
    report = exact.classify_minima(cluster4, 4)
    by_index = {info.index: info for info in report.minima}
    center = fixtures.dense_center_index(4)
    assert by_index[center].counts[1] == 5  # (1,5)-dense
    iso = by_index[fixtures.isolated_index()]
    assert iso.counts[1] == 1 and iso.counts[2] == 1
    assert iso.isolation_radius == 2  # nearest other minimum at distance 3


def test_classify_minima_unique_minimum():
    model = fixtures.two_state()
    table = np.array([0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    report = exact.classify_minima(TabulatedEnergy(table, n=3), 3)
    assert len(report.minima) == 1
    assert report.minima[0].isolation_radius == 3


def test_hamming_table():
    dist = exact.hamming_table(3, 0b111)
    assert dist.tolist() == [3, 2, 2, 1, 2, 1, 1, 0]
