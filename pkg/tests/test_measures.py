import numpy as np
import pytest

from chanres.errors import DimensionMismatch, UnsupportedCombination
from chanres.measures import (
    DistanceMeasure,
    FreeStateSet,
    c_l1,
    c_robustness,
    c_trace,
    distance,
    e1_ppt_bound,
    fidelity,
    max_relative_entropy,
    omega,
    omega_certified,
)
from chanres.objects import (
    DensityMatrix,
    apply_channel,
    random_channel,
    random_density_matrix,
    random_pure_state,
)

from conftest import oracle_closest_diagonal, oracle_robustness_qubit

TRACE = DistanceMeasure.TRACE
FID = DistanceMeasure.FIDELITY
DMAX = DistanceMeasure.DMAX

PLUS = DensityMatrix.pure([1, 1])
ZERO = DensityMatrix.basis_state(2, 0)
ONE = DensityMatrix.basis_state(2, 1)


# ---------------------------------------------------------------------------
# distances


def test_distance_of_state_to_itself(rng):
    rho = random_density_matrix(2, rng)
    assert distance(TRACE, rho, rho) == pytest.approx(0.0, abs=1e-9)
    assert distance(FID, rho, rho) == pytest.approx(0.0, abs=1e-7)
    assert distance(DMAX, rho, rho) == pytest.approx(0.0, abs=1e-9)


def test_trace_distance_orthogonal_states():
    assert distance(TRACE, ZERO, ONE) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_distance_example():
    assert distance(FID, ZERO, PLUS) == pytest.approx(np.sqrt(0.5), abs=1e-10)


def test_fidelity_pure_states_overlap(rng):
    a = random_pure_state(3, rng)
    b = random_pure_state(3, rng)
    overlap = abs(np.trace(a.matrix @ b.matrix))
    # sqrtm of a rank-deficient state is accurate to ~sqrt(machine eps)
    assert fidelity(a, b) ** 2 == pytest.approx(overlap, abs=1e-7)


def test_dmax_support_mismatch_is_infinite():
    assert max_relative_entropy(PLUS, ZERO) == float("inf")
    assert distance(DMAX, PLUS, ZERO) == float("inf")


def test_dmax_against_maximally_mixed():
    assert distance(DMAX, ZERO, DensityMatrix.maximally_mixed(2)) == pytest.approx(1.0, abs=1e-9)


def test_distance_symmetry(rng):
    a = random_density_matrix(3, rng)
    b = random_density_matrix(3, rng)
    for m in (TRACE, FID):
        assert distance(m, a, b) == pytest.approx(distance(m, b, a), abs=1e-9)


def test_distance_zero_iff_equal(rng):
    a = random_density_matrix(2, rng)
    b = random_density_matrix(2, rng)
    for m in (TRACE, FID):
        assert distance(m, a, b) > 1e-4


def test_distance_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        distance(TRACE, random_density_matrix(2, rng), random_density_matrix(3, rng))


def test_data_processing_inequality(rng):
    for _ in range(5):
        n = random_channel(2, rng)
        a = random_density_matrix(2, rng)
        b = random_density_matrix(2, rng)
        na, nb = apply_channel(n, a), apply_channel(n, b)
        for m in (TRACE, FID, DMAX):
            assert distance(m, na, nb) <= distance(m, a, b) + 1e-9


def test_triangle_inequality(rng):
    for _ in range(5):
        a = random_density_matrix(3, rng)
        b = random_density_matrix(3, rng)
        c = random_density_matrix(3, rng)
        for m in (TRACE, FID, DMAX):
            assert distance(m, a, b) <= distance(m, a, c) + distance(m, c, b) + 1e-9


# ---------------------------------------------------------------------------
# coherence measures


def test_c_l1_examples():
    assert c_l1(DensityMatrix.diagonal([0.4, 0.6])) == 0.0
    assert c_l1(PLUS) == pytest.approx(1.0, abs=1e-12)
    for d in (3, 4):
        mcs = DensityMatrix.pure(np.ones(d))
        assert c_l1(mcs) == pytest.approx(d - 1.0, abs=1e-12)


def test_c_trace_examples():
    assert c_trace(DensityMatrix.diagonal([0.4, 0.6])).value == pytest.approx(0.0, abs=1e-9)
    res = c_trace(PLUS)
    assert res.value == pytest.approx(0.5, abs=1e-9)
    res_sdp = c_trace(PLUS, method="sdp")
    assert res_sdp.value == pytest.approx(0.5, abs=1e-7)
    assert np.allclose(np.diag(res_sdp.sigma_star.matrix).real, [0.5, 0.5], atol=1e-6)


def test_c_trace_qubit_equals_half_l1(rng):
    for _ in range(10):
        rho = random_density_matrix(2, rng)
        res = c_trace(rho, method="sdp")
        assert res.value == pytest.approx(0.5 * c_l1(rho), abs=1e-6)
        assert 2 * res.value == pytest.approx(oracle_closest_diagonal(rho.matrix), abs=1e-5)
        assert res.solution.gap <= 1e-6


def test_c_trace_cross_validate_flag(rng):
    rho = random_density_matrix(2, rng)
    res = c_trace(rho, cross_validate=True)
    assert res.solution.gap == 0.0


def test_c_trace_dimension_cap(rng):
    for d in (2, 3, 4, 5):
        for _ in range(5):
            rho = random_density_matrix(d, rng)
            res = c_trace(rho, method="sdp" if d == 2 else "auto")
            assert res.value <= 1.0 - 1.0 / d + 1e-9


def test_c_trace_cap_saturated_by_uniform_superposition():
    # the cap 1 - 1/d is attained at the maximally coherent state, with the
    # maximally mixed state as the closest incoherent point
    for d in (2, 3, 4):
        mcs = DensityMatrix.pure(np.ones(d))
        res = c_trace(mcs, method="sdp" if d == 2 else "auto")
        assert res.value == pytest.approx(1.0 - 1.0 / d, abs=1e-6)
        assert np.allclose(np.diag(res.sigma_star.matrix).real, np.full(d, 1.0 / d), atol=1e-4)


def test_c_trace_monotone_under_free_channels(rng):
    from chanres.suites import _mio_member

    for _ in range(5):
        rho = random_density_matrix(2, rng)
        m = _mio_member(rng, 2)
        before = c_trace(rho).value
        after = c_trace(apply_channel(m, rho)).value
        assert after <= before + 1e-6


def test_c_robustness_examples(rng):
    assert c_robustness(DensityMatrix.diagonal([0.3, 0.7])) == pytest.approx(0.0, abs=1e-8)
    assert c_robustness(PLUS) == pytest.approx(1.0, abs=1e-8)
    for _ in range(5):
        rho = random_density_matrix(2, rng)
        value, sol = c_robustness(rho, full=True)
        assert value == pytest.approx(c_l1(rho), abs=1e-6)
        assert value == pytest.approx(oracle_robustness_qubit(rho.matrix), abs=1e-5)
        assert sol.gap <= 1e-6


def test_c_robustness_d3(rng):
    rho = random_density_matrix(3, rng)
    value, sol = c_robustness(rho, full=True)
    assert value >= 0.0
    assert sol.gap <= 1e-6
    # robustness dominates the l1 measure scaled by 1/(d-1)
    assert value >= c_l1(rho) / 2 - 1e-6


# ---------------------------------------------------------------------------
# the induced measure


def test_omega_examples(rng):
    inc = FreeStateSet.incoherent(2)
    assert omega(TRACE, inc, DensityMatrix.diagonal([0.2, 0.8])) == pytest.approx(0.0, abs=1e-9)
    assert omega(TRACE, inc, PLUS) == pytest.approx(0.5, abs=1e-9)
    assert omega(DMAX, inc, PLUS) == pytest.approx(1.0, abs=1e-7)
    v, gap = omega_certified(FID, inc, PLUS)
    assert v == pytest.approx(np.sqrt(0.5), abs=1e-7)
    assert gap <= 1e-6


def test_omega_matches_c_trace(rng):
    rho = random_density_matrix(3, rng)
    inc = FreeStateSet.incoherent(3)
    assert omega(TRACE, inc, rho) == pytest.approx(c_trace(rho).value, abs=1e-9)


def test_omega_dmax_equals_log_robustness(rng):
    rho = random_density_matrix(2, rng)
    inc = FreeStateSet.incoherent(2)
    assert omega(DMAX, inc, rho) == pytest.approx(np.log2(1.0 + c_robustness(rho)), abs=1e-6)


def test_omega_convexity_trace(rng):
    inc = FreeStateSet.incoherent(2)
    for _ in range(5):
        a = random_density_matrix(2, rng)
        b = random_density_matrix(2, rng)
        lam = rng.random()
        mix = DensityMatrix(lam * a.matrix + (1 - lam) * b.matrix)
        assert omega(TRACE, inc, mix) <= lam * omega(TRACE, inc, a) + (1 - lam) * omega(TRACE, inc, b) + 1e-8


def test_omega_monotone_under_free_channels(rng):
    from chanres.suites import _mio_member

    inc = FreeStateSet.incoherent(2)
    for _ in range(5):
        rho = random_pure_state(2, rng)
        m = _mio_member(rng, 2)
        assert omega(TRACE, inc, apply_channel(m, rho)) <= omega(TRACE, inc, rho) + 1e-6


def test_omega_ppt_lower_bound_semantics(rng):
    sep = FreeStateSet.separable_ppt(2, 2)
    assert sep.is_relaxation
    with pytest.raises(UnsupportedCombination):
        omega(DMAX, sep, DensityMatrix.maximally_mixed(4))


def test_omega_werner_boundary():
    # visibility-1/3 Werner state sits exactly on the PPT boundary
    bell = DensityMatrix.pure([1, 0, 0, 1]).matrix
    werner = DensityMatrix(bell / 3.0 + (2.0 / 3.0) * np.eye(4) / 4.0)
    sep = FreeStateSet.separable_ppt(2, 2)
    assert omega(TRACE, sep, werner) == pytest.approx(0.0, abs=1e-6)


def test_e1_ppt_examples(rng):
    # product and separable states sit inside the relaxation
    a = random_density_matrix(2, rng)
    b = random_density_matrix(2, rng)
    product = DensityMatrix(np.kron(a.matrix, b.matrix))
    assert e1_ppt_bound(product, (2, 2)).value <= 1e-6
    mixture = DensityMatrix(
        0.5 * np.kron(a.matrix, b.matrix) + 0.5 * np.kron(b.matrix, a.matrix)
    )
    assert e1_ppt_bound(mixture, (2, 2)).value <= 1e-6


def test_e1_ppt_bell_state():
    # frozen from the twirling argument (optimum on the isotropic line) and
    # cross-checked against an independent run at halved tolerance
    bell = DensityMatrix.pure([1, 0, 0, 1])
    bound = e1_ppt_bound(bell, (2, 2))
    assert bound.value == pytest.approx(1.0, abs=1e-6)
    assert bound.kind == "lower"
    tighter = e1_ppt_bound(bell, (2, 2), tol=5e-7)
    assert bound.value == pytest.approx(tighter.value, abs=1e-6)
    assert bound.gap <= 1e-6


def test_e1_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        e1_ppt_bound(random_density_matrix(3, rng), (2, 2))


def test_fidelity_omega_pure_closed_form_vs_sdp(rng):
    # the pure closed form (largest basis weight) against the full SDP route
    from chanres.measures import _max_fidelity_free

    psi = random_pure_state(3, rng)
    inc = FreeStateSet.incoherent(3)
    f_lo, f_hi, _sigma = _max_fidelity_free(psi, inc)
    expected = float(np.sqrt(np.max(np.real(np.diag(psi.matrix)))))
    assert f_lo == pytest.approx(expected, abs=1e-7)
    assert f_hi == pytest.approx(expected, abs=1e-7)
    # near-pure mixed input agrees with the closed form at the 1e-4 level
    blurred = DensityMatrix(0.999 * psi.matrix + 0.001 * np.eye(3) / 3)
    v_pure, _ = omega_certified(FID, inc, psi)
    v_mixed, gap = omega_certified(FID, inc, blurred)
    assert v_mixed == pytest.approx(v_pure, abs=5e-3)
    assert gap <= 1e-6


def test_free_state_set_extreme_points():
    inc = FreeStateSet.incoherent(3)
    points = list(inc.extreme_points())
    assert len(points) == 3
    for i, p in enumerate(points):
        assert p.matrix[i, i] == 1.0
    from chanres.errors import UnsupportedFreeSet

    with pytest.raises(UnsupportedFreeSet):
        list(FreeStateSet.separable_ppt(2, 2).extreme_points())
