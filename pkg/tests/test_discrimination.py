import json

import numpy as np
import pytest

from chanres.discrimination import (
    achieved_probability,
    advantage,
    explore_coherent_probe_advantage,
    helstrom,
    p_succ_free_probes,
    p_succ_incoherent_povm,
    p_succ_vs_class,
    verify_incoherent_povm_collapse,
)
from chanres.errors import DimensionMismatch
from chanres.measures import c_trace
from chanres.objects import (
    DensityMatrix,
    FreeChannelClass,
    apply_channel,
    dephasing_channel,
    identity_channel,
    random_channel,
    random_density_matrix,
    random_pure_state,
    replacement_channel,
    unitary_channel,
)

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
ZERO = DensityMatrix.basis_state(2, 0)
PLUS = DensityMatrix.pure([1, 1])
MIO2 = FreeChannelClass.mio(2)
DIO2 = FreeChannelClass.dio(2)


def test_helstrom_identical_channels(rng):
    n = random_channel(2, rng)
    res = helstrom(n, n, random_density_matrix(2, rng))
    assert res.p_succ == pytest.approx(0.5, abs=1e-12)
    # any returned effect stays feasible
    vals = np.linalg.eigvalsh(res.optimal_povm)
    assert vals.min() >= -1e-12 and vals.max() <= 1 + 1e-12


def test_helstrom_hadamard_vs_dephasing():
    res = helstrom(unitary_channel(HADAMARD), dephasing_channel(2), ZERO)
    assert res.p_succ == pytest.approx(0.5 + np.sqrt(2) / 4, abs=1e-9)


def test_helstrom_orthogonal_outputs():
    to_zero = replacement_channel(ZERO)
    to_one = replacement_channel(DensityMatrix.basis_state(2, 1))
    res = helstrom(to_zero, to_one, PLUS)
    assert res.p_succ == pytest.approx(1.0, abs=1e-12)


def test_helstrom_povm_achieves_value(rng):
    for _ in range(5):
        n = random_channel(2, rng)
        m = random_channel(2, rng)
        rho = random_density_matrix(2, rng)
        res = helstrom(n, m, rho)
        assert achieved_probability(n, m, rho, res.optimal_povm) == pytest.approx(res.p_succ, abs=1e-9)


def test_helstrom_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        helstrom(identity_channel(2), identity_channel(3), ZERO)


def test_helstrom_rectangular_channels(rng):
    # non-square channels are supported in the two-channel game
    n = random_channel(2, rng, dim_out=3)
    m = random_channel(2, rng, dim_out=3)
    res = helstrom(n, m, PLUS)
    assert 0.5 <= res.p_succ <= 1.0
    assert res.optimal_povm.shape == (3, 3)
    assert achieved_probability(n, m, PLUS, res.optimal_povm) == pytest.approx(res.p_succ, abs=1e-9)


def test_p_succ_vs_class_member_reaches_half(rng):
    delta = dephasing_channel(2)
    res = p_succ_vs_class(delta, MIO2, DensityMatrix.diagonal([0.3, 0.7]))
    assert res.p_succ == pytest.approx(0.5, abs=1e-6)


def test_p_succ_vs_class_hadamard():
    res = p_succ_vs_class(unitary_channel(HADAMARD), MIO2, ZERO)
    assert res.p_succ == pytest.approx(0.75, abs=1e-6)
    assert res.worst_free_channel is not None
    assert MIO2.contains(res.worst_free_channel, tol=1e-8)
    assert res.certificate_gap <= 1e-6


def test_p_succ_vs_class_matches_output_coherence(rng):
    # inner minimum over the class at a basis probe equals the distance of
    # the output to the incoherent set
    for _ in range(5):
        n = random_channel(2, rng)
        res = p_succ_vs_class(n, MIO2, ZERO)
        oracle = c_trace(apply_channel(n, ZERO)).value
        assert res.p_succ == pytest.approx(0.5 + 0.5 * oracle, abs=1e-4)


def test_class_nesting(rng):
    for _ in range(3):
        n = random_channel(2, rng)
        rho = random_pure_state(2, rng)
        p_mio = p_succ_vs_class(n, MIO2, rho).p_succ
        p_dio = p_succ_vs_class(n, DIO2, rho).p_succ
        assert p_dio >= p_mio - 1e-9


def test_free_probes_member():
    delta = dephasing_channel(2)
    res = p_succ_free_probes(delta, MIO2)
    assert res.value == pytest.approx(0.5, abs=1e-6)


def test_free_probes_hadamard():
    res = p_succ_free_probes(unitary_channel(HADAMARD), MIO2)
    assert res.value == pytest.approx(0.75, abs=1e-6)
    assert np.real(np.diag(res.probe.matrix)).max() == pytest.approx(1.0, abs=1e-12)


def test_free_probes_cross_route_qutrit(rng):
    n = random_channel(3, rng)
    for cls in (FreeChannelClass.mio(3), FreeChannelClass.dio(3)):
        res = p_succ_free_probes(n, cls)
        assert abs(res.power_route - res.probe_route) <= 1e-4


def test_advantage_incoherent_probe(rng):
    n = random_channel(2, rng)
    rep = advantage(n, MIO2, DensityMatrix.diagonal([0.6, 0.4]))
    assert rep.advantage <= 1e-6
    assert rep.within_bound and rep.within_ceiling


def test_advantage_hadamard_plus():
    rep = advantage(unitary_channel(HADAMARD), MIO2, PLUS)
    assert rep.bound == pytest.approx(0.25, abs=1e-9)  # half the probe coherence
    assert rep.within_bound and rep.within_ceiling


def test_advantage_randomized(rng):
    for i in range(10):
        n = random_channel(2, rng)
        probe = random_pure_state(2, rng) if i % 2 == 0 else random_density_matrix(2, rng)
        rep = advantage(n, MIO2 if i % 3 else DIO2, probe)
        assert rep.within_bound and rep.within_ceiling


def test_incoherent_povm_examples():
    n = unitary_channel(HADAMARD)
    res = p_succ_incoherent_povm(n, n, ZERO)
    assert res.p_succ == pytest.approx(0.5, abs=1e-12)
    res = p_succ_incoherent_povm(identity_channel(2), dephasing_channel(2), PLUS)
    assert res.p_succ == pytest.approx(0.5, abs=1e-12)
    res = p_succ_incoherent_povm(n, dephasing_channel(2), ZERO)
    assert res.p_succ == pytest.approx(0.75, abs=1e-12)
    assert np.allclose(res.optimal_povm, np.diag(np.diag(res.optimal_povm)))


def test_collapse_hadamard(rng):
    rep = verify_incoherent_povm_collapse(unitary_channel(HADAMARD), MIO2, random_density_matrix(2, rng))
    assert rep.passed
    assert rep.p_value == pytest.approx(0.5, abs=1e-8)
    assert rep.witness_in_class and rep.witness_sio_certified
    assert rep.certified_class_minimum <= 1e-6


def test_collapse_member_channel():
    rep = verify_incoherent_povm_collapse(dephasing_channel(2), DIO2, PLUS)
    assert rep.passed


def test_collapse_randomized(rng):
    for i in range(5):
        n = random_channel(2, rng)
        probe = random_pure_state(2, rng)
        cls = MIO2 if i % 2 else DIO2
        rep = verify_incoherent_povm_collapse(n, cls, probe)
        assert rep.passed
        assert abs(rep.p_value - 0.5) <= 1e-8


def test_explore_member_never_beats_half(rng):
    delta = dephasing_channel(2)
    res = explore_coherent_probe_advantage(delta, MIO2, restarts=3, rng=rng, maxfev=10)
    assert res.p_succ <= 0.5 + 1e-6


def test_explore_hadamard_floor_and_ceiling(rng):
    had = unitary_channel(HADAMARD)
    res = explore_coherent_probe_advantage(had, MIO2, restarts=3, rng=rng, maxfev=10)
    assert res.p_succ >= 0.75 - 1e-6
    # absolute ceiling from the probe's own coherence
    probe_measure = c_trace(res.probe).value
    assert res.p_succ <= 0.75 + 0.5 * probe_measure + 1e-6


def test_explore_sio_tag_reports_sandwich(rng):
    had = unitary_channel(HADAMARD)
    res = explore_coherent_probe_advantage(had, "sio", restarts=2, rng=rng, maxfev=8)
    assert res.class_tag == "SIO"
    assert res.upper_family_value is not None
    assert "lower bound" in res.note
    assert res.p_succ <= res.upper_family_value + 1e-9


def test_game_transcript_is_json_ready():
    from chanres.discrimination import game_transcript

    n = unitary_channel(HADAMARD, name="hadamard")
    res = p_succ_vs_class(n, MIO2, ZERO)
    record = game_transcript(res, n, class_tag="MIO")
    encoded = json.dumps(record, sort_keys=True)
    decoded = json.loads(encoded)
    assert decoded["channel"] == "hadamard"
    assert decoded["class"] == "MIO"
    assert decoded["p_in_range"] is True
    assert decoded["p_succ"] == pytest.approx(0.75, abs=1e-6)
