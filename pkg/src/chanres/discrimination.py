"""Channel discrimination games against convex classes of free channels.

Two-channel discrimination with the optimal two-outcome measurement has
success probability 1/2 + ||N(rho) - M(rho)||_1 / 4.  Against a convex
channel class the inner minimization over M runs in Choi space: M(rho)
is linear in the Choi matrix J, so one certified trace-norm template
covers the free-probe game, the advantage bounds, and the diagonal
measurement collapse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AssertionMismatch, DimensionMismatch
from .linalg import dagger, herm_eig, hermitian_basis, symmetrize, trace_norm
from .measures import DistanceMeasure, FreeStateSet, c_trace, omega
from .objects import (
    DensityMatrix,
    FreeChannelClass,
    QuantumChannel,
    apply_channel,
    as_rng,
    certify_io_kraus,
    certify_sio_kraus,
    dephase,
    random_state_vector,
    replacement_channel,
    trace_preserving_constraints,
)
from .power import generating_power
from .solver import ConvexProblem, PsdView, coeffs_of, flatten_all, minimize_trace_norm


@dataclass
class DiscriminationResult:
    p_succ: float
    optimal_povm: np.ndarray
    worst_free_channel: QuantumChannel | None
    probe: DensityMatrix
    certificate_gap: float


def _povm_for_difference(diff: np.ndarray):
    """Projector onto the strictly positive eigenspace of the difference.

    Zero eigenvalues go to the complement, which keeps the output
    deterministic without changing the success probability.
    """
    vals, vecs = herm_eig(symmetrize(diff), tol=np.inf)
    keep = vals > 1e-12 * max(1.0, float(np.max(np.abs(vals))))
    v = vecs[:, keep]
    return v @ dagger(v)


def helstrom(n: QuantumChannel, m: QuantumChannel, rho: DensityMatrix) -> DiscriminationResult:
    """Optimal two-channel discrimination with probe rho."""
    if n.dim_in != rho.dim or m.dim_in != rho.dim or n.dim_out != m.dim_out:
        raise DimensionMismatch("channel/probe dimensions disagree")
    out_n = n.apply_matrix(rho.matrix)
    out_m = m.apply_matrix(rho.matrix)
    diff = out_n - out_m
    p = 0.5 + 0.25 * trace_norm(diff)
    povm = _povm_for_difference(diff)
    return DiscriminationResult(p, povm, None, rho, 0.0)


def achieved_probability(n: QuantumChannel, m: QuantumChannel, rho: DensityMatrix, povm: np.ndarray) -> float:
    """Success probability of a specific two-outcome measurement."""
    out_n = n.apply_matrix(rho.matrix)
    out_m = m.apply_matrix(rho.matrix)
    eye = np.eye(n.dim_out)
    return float(np.real(0.5 * np.trace(out_n @ povm) + 0.5 * np.trace(out_m @ (eye - povm))))


# ---------------------------------------------------------------------------
# Choi-space inner minimization


def channel_discrimination_problem(
    n: QuantumChannel,
    free_class: FreeChannelClass,
    rho: DensityMatrix,
    dephase_objective: bool = False,
) -> ConvexProblem:
    """min over class members M of ||N(rho) - M(rho)||_1 as a ConvexProblem.

    With ``dephase_objective`` both outputs pass through the full
    dephasing map first (the diagonal-measurement game).
    """
    d = free_class.dim
    if n.dim_in != d or n.dim_out != d or rho.dim != d:
        raise DimensionMismatch("channel, class and probe dimensions disagree")
    basis = hermitian_basis(d * d)
    basis_flat = flatten_all(basis)
    stacked = basis_flat.reshape(-1, d, d, d, d)
    images = np.einsum("ij,niajb->nab", rho.matrix, stacked)
    target = n.apply_matrix(rho.matrix)
    if dephase_objective:
        target = dephase(target)
        mask = np.eye(d)[None, :, :]
        images = images * mask
    cons = trace_preserving_constraints(d, d) + list(free_class.constraints)
    eq_matrix = np.stack([coeffs_of(g, basis_flat) for g, _ in cons])
    eq_rhs = np.array([val for _, val in cons], dtype=float)
    interior = coeffs_of(np.kron(np.eye(d), np.eye(d)) / d, basis_flat)

    cheap = None
    off_mass = float(np.max(np.abs(rho.matrix - dephase(rho.matrix))))
    if not dephase_objective and off_mass <= 1e-14:
        populations = np.real(np.diag(rho.matrix)).copy()
        cheap = _diagonal_probe_multipliers(d, populations, len(cons), free_class)

    return ConvexProblem(
        name=f"discriminate-vs-{free_class.tag.lower()}",
        target=target,
        obj_dim=d,
        obj_images_flat=images.reshape(images.shape[0], -1),
        psd_views=[PsdView(np.zeros((d * d, d * d), dtype=complex), basis_flat, d * d)],
        eq_matrix=eq_matrix,
        eq_rhs=eq_rhs,
        var_dim=d * d,
        var_basis_flat=basis_flat,
        interior=interior,
        param_norm_bound=float(d),
        cheap_multipliers=cheap,
    )


def _diagonal_probe_multipliers(d: int, populations: np.ndarray, n_eq: int, free_class: FreeChannelClass):
    """Closed-form dual data for diagonal probes.

    For probe sum_i p_i |i><i|, the multipliers mirror the closest-diagonal-
    state dual: the trace-preservation rows absorb p_i * max_k W_kk on each
    input projector, the incoherent-block rows absorb the off-diagonal of
    W, and the leftover Z = sum_i p_i |i><i| (x) (max_k W_kk - Delta(W)) is
    PSD by construction.
    """

    def cheap(w):
        wdiag = np.real(np.diag(w))
        top = float(np.max(wdiag))
        y = np.zeros(n_eq)
        # trace-preservation rows follow hermitian_basis(d): projectors first
        for i in range(d):
            y[i] = populations[i] * top
        # incoherent-block rows follow the class constraint ordering:
        # for each input index i, for each k < l, (real, imag)
        idx = d * d
        for i in range(d):
            for k in range(d):
                for l in range(k + 1, d):
                    y[idx] = populations[i] * float(np.real(w[k, l]))
                    y[idx + 1] = populations[i] * float(np.imag(w[k, l]))
                    idx += 2
        hollow_def = top * np.eye(d) - np.diag(wdiag)
        z = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            z[i * d : (i + 1) * d, i * d : (i + 1) * d] = populations[i] * hollow_def
        return y, [z]

    return cheap


def p_succ_vs_class(
    n: QuantumChannel, free_class: FreeChannelClass, rho: DensityMatrix, tol: float = 1e-6
) -> DiscriminationResult:
    """Worst-case discrimination of N against a convex channel class."""
    problem = channel_discrimination_problem(n, free_class, rho)
    sol = minimize_trace_norm(problem, tol=tol)
    j = symmetrize(problem.variable_matrix(sol.minimizer))
    worst = QuantumChannel(free_class.dim, free_class.dim, j, name=f"worst-{free_class.tag.lower()}")
    diff = n.apply_matrix(rho.matrix) - worst.apply_matrix(rho.matrix)
    return DiscriminationResult(
        p_succ=0.5 + 0.25 * sol.primal_value,
        optimal_povm=_povm_for_difference(diff),
        worst_free_channel=worst,
        probe=rho,
        certificate_gap=0.25 * sol.gap,
    )


@dataclass
class FreeProbeResult:
    value: float
    probe: DensityMatrix
    power_route: float
    probe_route: float | None
    certificate_gap: float


def p_succ_free_probes(
    n: QuantumChannel, free_class: FreeChannelClass, tol: float = 1e-6, cross_check: bool = True
) -> FreeProbeResult:
    """Best free-probe success probability, computed two independent ways.

    Route (a): 1/2 + generating_power/2.  Route (b): maximize the Choi-space
    class game over basis-state probes.  The two agree exactly in theory;
    disagreement beyond 1e-4 raises AssertionMismatch.  ``cross_check=False``
    skips route (b) (useful inside randomized sweeps).
    """
    report = generating_power(n, DistanceMeasure.TRACE, tol=tol)
    route_a = 0.5 + 0.5 * report.generating
    if not cross_check:
        return FreeProbeResult(route_a, report.maximizing_free_state, route_a, None, 0.5 * report.certificate_gap)
    best_b, best_probe, worst_gap = -1.0, None, 0.0
    for i in range(free_class.dim):
        probe = DensityMatrix.basis_state(free_class.dim, i)
        res = p_succ_vs_class(n, free_class, probe, tol=tol)
        worst_gap = max(worst_gap, res.certificate_gap)
        if res.p_succ > best_b:
            best_b, best_probe = res.p_succ, probe
    if abs(route_a - best_b) > 1e-4:
        raise AssertionMismatch(
            f"free-probe routes disagree: power route {route_a!r} vs probe route {best_b!r}"
        )
    return FreeProbeResult(best_b, best_probe, route_a, best_b, worst_gap)


@dataclass
class AdvantageReport:
    advantage: float
    bound: float
    within_bound: bool
    p_probe: float
    p_free: float
    ceiling: float
    within_ceiling: bool


def advantage(
    n: QuantumChannel, free_class: FreeChannelClass, rho: DensityMatrix, tol: float = 1e-6, slack: float = 1e-6
) -> AdvantageReport:
    """Gain from a resourceful probe over the best free probe.

    Checks both the advantage bound (gain <= omega_1(rho)/2) and the
    absolute ceiling p <= 1/2 + generating/2 + omega_1(rho)/2.
    """
    res = p_succ_vs_class(n, free_class, rho, tol=tol)
    free_res = p_succ_free_probes(n, free_class, tol=tol, cross_check=False)
    gain = res.p_succ - free_res.value
    w1 = omega(DistanceMeasure.TRACE, FreeStateSet.incoherent(rho.dim), rho, tol)
    bound = 0.5 * w1
    ceiling = free_res.value + 0.5 * w1
    return AdvantageReport(
        advantage=gain,
        bound=bound,
        within_bound=gain <= bound + slack,
        p_probe=res.p_succ,
        p_free=free_res.value,
        ceiling=ceiling,
        within_ceiling=res.p_succ <= ceiling + slack,
    )


# ---------------------------------------------------------------------------
# diagonal (incoherent) measurements


def p_succ_incoherent_povm(n: QuantumChannel, m: QuantumChannel, rho: DensityMatrix) -> DiscriminationResult:
    """Discrimination restricted to measurements diagonal in the fixed basis.

    The optimal diagonal effect collects the indices where the dephased
    outputs differ positively, giving 1/2 + ||Delta(N(rho)) - Delta(M(rho))||_1 / 4.
    """
    if n.dim_in != rho.dim or m.dim_in != rho.dim or n.dim_out != m.dim_out:
        raise DimensionMismatch("channel/probe dimensions disagree")
    diff = np.real(np.diag(n.apply_matrix(rho.matrix)) - np.diag(m.apply_matrix(rho.matrix)))
    p = 0.5 + 0.25 * float(np.sum(np.abs(diff)))
    povm = np.diag((diff > 0).astype(float)).astype(complex)
    return DiscriminationResult(p, povm, None, rho, 0.0)


@dataclass
class CollapseReport:
    passed: bool
    p_value: float
    witness: QuantumChannel
    witness_in_class: bool
    witness_sio_certified: bool
    certified_class_minimum: float


def verify_incoherent_povm_collapse(
    n: QuantumChannel, free_class: FreeChannelClass, rho: DensityMatrix, tol: float = 1e-6
) -> CollapseReport:
    """Diagonal measurements cannot beat random guessing against a free class.

    Constructs the replacement channel onto the dephased channel output;
    it is a class member (with a strictly-incoherent Kraus certificate)
    whose dephased output coincides with the channel's, forcing the game
    value to 1/2.  A certified solve additionally confirms the class-wide
    minimum of the dephased distance is zero.
    """
    out_diag = np.real(np.diag(n.apply_matrix(rho.matrix)))
    out_diag = np.clip(out_diag, 0.0, None)
    out_diag = out_diag / out_diag.sum()
    witness = replacement_channel(DensityMatrix.diagonal(out_diag), dim_in=n.dim_in)
    in_class = free_class.contains(witness)
    sio_ok = witness.kraus is not None and certify_sio_kraus(witness.kraus) and certify_io_kraus(witness.kraus)
    res = p_succ_incoherent_povm(n, witness, rho)
    problem = channel_discrimination_problem(n, free_class, rho, dephase_objective=True)
    sol = minimize_trace_norm(problem, tol=tol)
    passed = abs(res.p_succ - 0.5) <= 1e-8 and in_class and sio_ok and sol.primal_value <= tol
    return CollapseReport(
        passed=passed,
        p_value=res.p_succ,
        witness=witness,
        witness_in_class=in_class,
        witness_sio_certified=sio_ok,
        certified_class_minimum=sol.primal_value,
    )


# ---------------------------------------------------------------------------
# probe exploration


def game_transcript(
    result: DiscriminationResult, channel: QuantumChannel, class_tag: str | None = None
) -> dict:
    """JSON-ready record of a discrimination game.

    Carries the probe, channel identifiers, class tag, success probability
    and certificate gap, plus the bound checks other tooling asserts on.
    """
    probe_diag = [float(x) for x in np.real(np.diag(result.probe.matrix))]
    record = {
        "channel": channel.name or "unnamed",
        "channel_dims": [channel.dim_in, channel.dim_out],
        "class": class_tag,
        "probe_diagonal": probe_diag,
        "probe_coherence_l1": float(
            np.sum(np.abs(result.probe.matrix - np.diag(np.diag(result.probe.matrix))))
        ),
        "p_succ": result.p_succ,
        "certificate_gap": result.certificate_gap,
        "p_in_range": bool(0.5 - 1e-9 <= result.p_succ <= 1.0 + 1e-9),
    }
    if result.worst_free_channel is not None:
        record["worst_channel"] = result.worst_free_channel.name or "unnamed"
    return record


@dataclass
class ExplorationResult:
    probe: DensityMatrix
    p_succ: float
    upper_family_value: float | None
    class_tag: str
    note: str


def explore_coherent_probe_advantage(
    n: QuantumChannel,
    free_class,
    restarts: int = 8,
    rng=0,
    tol: float = 1e-6,
    maxfev: int = 40,
    extra_members=(),
) -> ExplorationResult:
    """Heuristic search for probes beating the free-probe value.

    For the convex classes the inner game is exact, so the result is a
    certified lower bound on the best-probe success probability.  For the
    SIO/IO tags, which have no convex Choi description, the exact game is
    replaced by two sandwiching routes: the containing convex class (a
    valid lower bound, since shrinking the channel class can only raise
    the game value) and the replacement-channel family plus any supplied
    Kraus-certified members (an upper bound on the inner minimum at the
    reported probe).
    """
    rng = as_rng(rng)
    if isinstance(free_class, str):
        tag = free_class.strip().upper()
    else:
        tag = free_class.tag
    d = n.dim_in
    convex_class = free_class if isinstance(free_class, FreeChannelClass) else FreeChannelClass.mio(d)
    if tag in ("SIO", "IO"):
        convex_class = FreeChannelClass.mio(d)

    def upper_family(rho: DensityMatrix) -> float:
        out = apply_channel(n, rho)
        vals = [2.0 * c_trace(out, tol=tol).value]
        for member in extra_members:
            vals.append(trace_norm(out.matrix - member.apply_matrix(rho.matrix)))
        return 0.5 + 0.25 * min(vals)

    def exact_value(rho: DensityMatrix) -> float:
        return p_succ_vs_class(n, convex_class, rho, tol=tol).p_succ

    def objective(v: np.ndarray) -> float:
        psi = v[:d] + 1j * v[d:]
        nrm = np.linalg.norm(psi)
        if nrm < 1e-12:
            return 0.0
        return -exact_value(DensityMatrix.pure(psi / nrm))

    starts = []
    for i in range(d):
        v = np.zeros(2 * d)
        v[i] = 1.0
        starts.append(v)
    for _ in range(max(0, restarts - d)):
        psi = random_state_vector(d, rng)
        starts.append(np.concatenate([psi.real, psi.imag]))

    best_p, best_probe = -1.0, DensityMatrix.basis_state(d, 0)
    for v0 in starts:
        p0 = -objective(v0)
        if p0 > best_p:
            psi = v0[:d] + 1j * v0[d:]
            best_p, best_probe = p0, DensityMatrix.pure(psi / np.linalg.norm(psi))
        res = optimize.minimize(objective, v0, method="Nelder-Mead", options={"maxfev": maxfev, "xatol": 1e-4, "fatol": 1e-9})
        if -res.fun > best_p:
            psi = res.x[:d] + 1j * res.x[d:]
            if np.linalg.norm(psi) > 1e-12:
                best_p, best_probe = -float(res.fun), DensityMatrix.pure(psi / np.linalg.norm(psi))

    upper = upper_family(best_probe) if tag in ("SIO", "IO") else None
    note = "lower bound on the best-probe success probability"
    if tag in ("SIO", "IO"):
        note += f" against {tag} (inner game sandwiched: convex-class lower route, replacement-family upper route)"
    return ExplorationResult(best_probe, best_p, upper, tag, note)
