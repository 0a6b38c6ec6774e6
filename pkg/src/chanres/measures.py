"""Distance measures and the induced state resource quantifiers.

Conventions (kept uniform across the package):

  * trace distance      D_1(rho, sigma) = ||rho - sigma||_1 / 2
  * fidelity distance   D_F = sqrt(1 - F^2),  F = Tr|sqrt(rho) sqrt(sigma)|
  * max-relative entropy D_max = log2 min{t : rho <= t sigma}  (not symmetric)

The induced measure of a state against a free set F is
omega_D(rho) = min_{sigma in F} D(rho, sigma).  For the incoherent set and
the trace distance this is the trace-norm coherence C_1; the robustness
C_R and the l1 measure are computed separately.  Entanglement distances
use the PPT relaxation of the separable set and are therefore lower
bounds, never exact values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from .errors import DimensionMismatch, UnsupportedCombination, UnsupportedFreeSet
from .linalg import (
    dagger,
    eigvals_hermitian,
    herm_eig,
    hermitian_basis,
    partial_transpose,
    symmetrize,
    trace_norm,
)
from .objects import DensityMatrix, dephase
from .solver import (
    CertifiedSolution,
    ConvexProblem,
    PsdView,
    coeffs_of,
    flatten_all,
    minimize_trace_norm,
)


class DistanceMeasure(enum.Enum):
    TRACE = "trace"
    FIDELITY = "fidelity"
    DMAX = "dmax"

    @staticmethod
    def parse(tag: str) -> "DistanceMeasure":
        return DistanceMeasure(tag.strip().lower())


@dataclass(frozen=True)
class FreeStateSet:
    """Convex closed free-state set; the incoherent set has enumerable
    extreme points, the PPT set is an outer relaxation of separability."""

    tag: str
    dims: tuple

    @staticmethod
    def incoherent(dim: int) -> "FreeStateSet":
        return FreeStateSet("incoherent", (dim,))

    @staticmethod
    def separable_ppt(dim_a: int, dim_b: int) -> "FreeStateSet":
        return FreeStateSet("separable_ppt", (dim_a, dim_b))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_relaxation(self) -> bool:
        return self.tag == "separable_ppt"

    def extreme_points(self):
        """Pure free states; only enumerable for the incoherent set."""
        if self.tag != "incoherent":
            raise UnsupportedFreeSet(f"extreme points of {self.tag} are not enumerable")
        for i in range(self.dim):
            yield DensityMatrix.basis_state(self.dim, i)


# ---------------------------------------------------------------------------
# plain distances


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    vals, vecs = herm_eig(symmetrize(m), tol=np.inf)
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ dagger(vecs)


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity F = Tr|sqrt(rho) sqrt(sigma)| in [0, 1]."""
    s = sqrtm_psd(rho.matrix)
    inner = symmetrize(s @ sigma.matrix @ s)
    vals = eigvals_hermitian(inner, tol=np.inf)
    return float(min(1.0, np.sum(np.sqrt(np.clip(vals, 0.0, None)))))


def max_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix, support_tol: float = 1e-10) -> float:
    """log2 of the smallest t with rho <= t sigma; +inf on support mismatch."""
    vals, vecs = herm_eig(sigma.matrix)
    top = float(np.max(vals))
    keep = vals > support_tol * max(1.0, top)
    v_supp = vecs[:, keep]
    proj_out = rho.matrix @ (np.eye(rho.dim) - v_supp @ dagger(v_supp))
    if float(np.max(np.abs(proj_out))) > 1e-8:
        return float("inf")
    inv_sqrt = v_supp @ np.diag(1.0 / np.sqrt(vals[keep])) @ dagger(v_supp)
    core = symmetrize(inv_sqrt @ rho.matrix @ inv_sqrt)
    t = float(np.max(eigvals_hermitian(core, tol=np.inf)))
    return float(np.log2(max(t, 1e-300)))


def distance(measure: DistanceMeasure, rho: DensityMatrix, sigma: DensityMatrix) -> float:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"states of dim {rho.dim} and {sigma.dim}")
    if measure is DistanceMeasure.TRACE:
        return 0.5 * trace_norm(rho.matrix - sigma.matrix)
    if measure is DistanceMeasure.FIDELITY:
        f = fidelity(rho, sigma)
        return float(np.sqrt(max(0.0, 1.0 - f * f)))
    if measure is DistanceMeasure.DMAX:
        return max_relative_entropy(rho, sigma)
    raise ValueError(f"unknown measure {measure}")


# ---------------------------------------------------------------------------
# problem builders


def diagonal_state_problem(rho: np.ndarray) -> ConvexProblem:
    """min ||rho - diag(x)||_1 over probability vectors x."""
    d = rho.shape[0]
    projectors = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        projectors.append(e)
    flats = flatten_all(projectors)

    def cheap(w):
        wdiag = np.real(np.diag(w))
        top = float(np.max(wdiag))
        y = np.array([top])
        z = np.diag(top - wdiag).astype(complex)
        return y, [z]

    return ConvexProblem(
        name="closest-diagonal-state",
        target=np.asarray(rho, dtype=complex),
        obj_dim=d,
        obj_images_flat=flats,
        psd_views=[PsdView(np.zeros((d, d), dtype=complex), flats, d)],
        eq_matrix=np.ones((1, d)),
        eq_rhs=np.array([1.0]),
        var_dim=d,
        var_basis_flat=flats,
        interior=np.full(d, 1.0 / d),
        param_norm_bound=1.0,
        cheap_multipliers=cheap,
    )


def robustness_problem(rho: np.ndarray) -> ConvexProblem:
    """min Tr(D) over diagonal D >= rho; the measure is Tr(D) - 1.

    Since D >= rho >= 0 forces nonnegative entries, ||x||_1 equals the
    objective, which justifies the objective-valued parameter bound.
    """
    d = rho.shape[0]
    projectors = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        projectors.append(e)
    flats = flatten_all(projectors)
    top = float(np.max(eigvals_hermitian(np.asarray(rho, dtype=complex))))
    return ConvexProblem(
        name="diagonal-majorization",
        target=np.zeros((d, d), dtype=complex),
        obj_dim=d,
        obj_images_flat=flats,
        psd_views=[PsdView(-np.asarray(rho, dtype=complex), flats, d)],
        eq_matrix=np.zeros((0, d)),
        eq_rhs=np.zeros(0),
        var_dim=d,
        var_basis_flat=flats,
        interior=np.full(d, top + 1.0),
        param_norm_bound=None,
    )


def ppt_state_problem(rho: np.ndarray, dims) -> ConvexProblem:
    """min ||rho - sigma||_1 over PPT states sigma on the bipartite space."""
    d_a, d_b = dims
    d = d_a * d_b
    basis = hermitian_basis(d)
    flats = flatten_all(basis)
    pt_flats = flatten_all([partial_transpose(b, dims, "B") for b in basis])
    eye = np.eye(d, dtype=complex)
    return ConvexProblem(
        name="closest-ppt-state",
        target=np.asarray(rho, dtype=complex),
        obj_dim=d,
        obj_images_flat=flats,
        psd_views=[
            PsdView(np.zeros((d, d), dtype=complex), flats, d),
            PsdView(np.zeros((d, d), dtype=complex), pt_flats, d),
        ],
        eq_matrix=np.array([[float(np.real(np.trace(b))) for b in basis]]),
        eq_rhs=np.array([1.0]),
        var_dim=d,
        var_basis_flat=flats,
        interior=coeffs_of(eye / d, flats),
        param_norm_bound=1.0,
    )


# ---------------------------------------------------------------------------
# coherence measures


def c_l1(rho: DensityMatrix) -> float:
    """Sum of absolute off-diagonal entries."""
    m = rho.matrix
    return float(np.sum(np.abs(m - np.diag(np.diag(m)))))


@dataclass
class CoherenceResult:
    value: float
    sigma_star: DensityMatrix
    solution: CertifiedSolution


def _qubit_fast_trace(rho: DensityMatrix) -> CoherenceResult:
    z = complex(rho.matrix[0, 1])
    mag = abs(z)
    sigma = DensityMatrix(dephase(rho.matrix))
    if mag < 1e-15:
        sol = CertifiedSolution(0.0, np.real(np.diag(rho.matrix)), np.zeros((2, 2), dtype=complex), 0.0, 0.0, 0, True)
        return CoherenceResult(0.0, sigma, sol)
    # the off-diagonal sign operator is an exact dual witness here
    w = np.array([[0.0, z / mag], [np.conj(z) / mag, 0.0]])
    sol = CertifiedSolution(2.0 * mag, np.real(np.diag(rho.matrix)), w, 2.0 * mag, 0.0, 0, True)
    return CoherenceResult(mag, sigma, sol)


def c_trace(rho: DensityMatrix, tol: float = 1e-6, method: str = "auto", cross_validate: bool = False) -> CoherenceResult:
    """Trace-norm coherence C_1 = min over incoherent sigma of ||rho - sigma||_1 / 2.

    For qubits the closed form C_1 = |rho_01| (equal to C_l1 / 2) is used
    unless ``method='sdp'``; ``cross_validate`` additionally runs the
    solver and asserts agreement, as a debugging aid.
    """
    if method == "auto" and rho.dim == 2:
        fast = _qubit_fast_trace(rho)
        if cross_validate:
            solved = c_trace(rho, tol=tol, method="sdp")
            if abs(solved.value - fast.value) > max(tol, 1e-6):
                raise AssertionError(
                    f"qubit closed form {fast.value} vs solver {solved.value} disagree"
                )
        return fast
    problem = diagonal_state_problem(rho.matrix)
    sol = minimize_trace_norm(problem, tol=tol)
    populations = np.clip(np.real(sol.minimizer), 0.0, None)
    populations = populations / populations.sum()
    return CoherenceResult(0.5 * sol.primal_value, DensityMatrix.diagonal(populations), sol)


def c_robustness(rho: DensityMatrix, tol: float = 1e-6, full: bool = False):
    """Robustness of coherence via min{Tr(D) - 1 : D diagonal, D >= rho}."""
    sol = minimize_trace_norm(robustness_problem(rho.matrix), tol=tol)
    value = max(0.0, sol.primal_value - 1.0)
    return (value, sol) if full else value


@dataclass
class E1Bound:
    """Certified lower bound on the trace-norm entanglement E_1.

    The minimization runs over PPT states, a superset of the separable
    set, so the value can only under-estimate E_1.
    """

    value: float
    gap: float
    sigma_star: np.ndarray
    kind: str = "lower"


def e1_ppt_bound(rho: DensityMatrix, dims, tol: float = 1e-6) -> E1Bound:
    d_a, d_b = dims
    if rho.dim != d_a * d_b:
        raise DimensionMismatch(f"state dim {rho.dim} vs {d_a}x{d_b}")
    problem = ppt_state_problem(rho.matrix, dims)
    sol = minimize_trace_norm(problem, tol=tol)
    sigma = problem.variable_matrix(sol.minimizer)
    return E1Bound(value=sol.primal_value, gap=sol.gap, sigma_star=sigma)


# ---------------------------------------------------------------------------
# fidelity maximization over free sets (for the fidelity-induced measure)


def _pure_part(rho: DensityMatrix):
    """(top eigenvector, 1 - top eigenvalue) for near-pure detection."""
    vals, vecs = herm_eig(rho.matrix)
    return vecs[:, 0], max(0.0, 1.0 - float(vals[0]))


def _max_fidelity_pure(rho: DensityMatrix, free: FreeStateSet):
    """Fidelity maximization for (numerically) pure rho.

    For pure psi, F(psi, sigma) = sqrt(<psi|sigma|psi>), linear in sigma,
    so the incoherent case is a closed form over basis projectors and the
    PPT case a linear SDP whose bound is repaired via an exact largest
    eigenvalue.  Substituting the top eigenvector for a not-exactly-pure
    input costs at most sqrt(1 - top eigenvalue) in fidelity, which is
    folded into the returned sandwich.
    """
    psi, defect = _pure_part(rho)
    slop = float(np.sqrt(defect))
    if free.tag == "incoherent":
        weights = np.abs(psi) ** 2
        best = int(np.argmax(weights))
        f_val = float(np.sqrt(weights[best]))
        sigma = DensityMatrix.basis_state(rho.dim, best)
        return max(0.0, fidelity(rho, sigma)), min(1.0, f_val + slop), sigma
    d = rho.dim
    proj = np.outer(psi, psi.conj())
    sigma_var = cp.Variable((d, d), hermitian=True)
    cons = [
        sigma_var >> 0,
        cp.partial_transpose(sigma_var, list(free.dims), 1) >> 0,
        cp.real(cp.trace(sigma_var)) == 1,
    ]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(proj @ sigma_var))), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=1e-9)
    raw = symmetrize(np.asarray(sigma_var.value, dtype=complex))
    lo = float(np.min(eigvals_hermitian(raw, tol=np.inf)))
    lo_pt = float(np.min(eigvals_hermitian(partial_transpose(raw, free.dims, "B"), tol=np.inf)))
    theta = max(0.0, -min(lo, lo_pt)) * d
    raw = (raw + theta * np.eye(d) / d) / (1.0 + theta)
    sigma = DensityMatrix(raw / float(np.real(np.trace(raw))))
    # upper bound: Tr[P sigma] <= lambda_max(P + Z^T_B) for any Z >= 0,
    # since Tr[Z^T_B sigma] = Tr[Z sigma^T_B] >= 0 on PPT states.  Solve
    # for the best Z explicitly, then evaluate the bound exactly.
    zvar = cp.Variable((d, d), hermitian=True)
    tvar = cp.Variable()
    cert = cp.Problem(
        cp.Minimize(tvar),
        [zvar >> 0, tvar * np.eye(d) >> proj + cp.partial_transpose(zvar, list(free.dims), 1)],
    )
    try:
        cert.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        cert.solve(solver=cp.SCS, eps=1e-9)
    t = 1.0
    if zvar.value is not None:
        z_n = symmetrize(np.asarray(zvar.value, dtype=complex))
        lo_z = float(np.min(eigvals_hermitian(z_n, tol=np.inf)))
        if lo_z < 0:
            z_n = z_n + (-lo_z) * np.eye(d)
        t = float(
            np.max(eigvals_hermitian(symmetrize(proj + partial_transpose(z_n, free.dims, "B")), tol=np.inf))
        )
    f_sq_hi = min(1.0, t)
    return max(0.0, fidelity(rho, sigma)), min(1.0, float(np.sqrt(max(f_sq_hi, 0.0))) + slop), sigma


def _max_fidelity_free(rho: DensityMatrix, free: FreeStateSet):
    """Largest fidelity between rho and the free set, with a certified
    [achievable, upper-bound] sandwich.

    Primal: F = max Re Tr(X) s.t. [[rho, X], [X†, sigma]] >= 0 with sigma
    free.  Any Y >= 0 with off-diagonal corner pinned to -I/2 and
    Y22 (+ Z^T_B for the PPT set, Z >= 0) equal to lambda*I on the free
    directions certifies F <= Tr[Y11 rho] + lambda, so the dual solve's
    output is repaired to that exact shape before evaluating the bound.
    The dual optimum is not attained for rank-deficient rho, so pure
    inputs take a dedicated linear route instead.
    """
    _psi, defect = _pure_part(rho)
    if defect <= 1e-12:
        return _max_fidelity_pure(rho, free)
    d = rho.dim
    x_block = cp.Variable((d, d), complex=True)
    if free.tag == "incoherent":
        pops = cp.Variable(d)
        sigma_expr = cp.diag(pops)
        extra = [cp.sum(pops) == 1]
    else:
        sigma_var = cp.Variable((d, d), hermitian=True)
        sigma_expr = sigma_var
        pt = cp.partial_transpose(sigma_var, list(free.dims), 1)
        extra = [cp.real(cp.trace(sigma_var)) == 1, pt >> 0]
    block = cp.bmat([[np.asarray(rho.matrix), x_block], [x_block.H, sigma_expr]])
    cons = [block >> 0] + extra
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(x_block))), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=1e-9)

    if free.tag == "incoherent":
        populations = np.clip(np.asarray(pops.value, dtype=float), 1e-300, None)
        populations /= populations.sum()
        sigma = DensityMatrix.diagonal(populations)
    else:
        raw = symmetrize(np.asarray(sigma_var.value, dtype=complex))
        lo = float(np.min(eigvals_hermitian(raw, tol=np.inf)))
        lo_pt = float(np.min(eigvals_hermitian(partial_transpose(raw, free.dims, "B"), tol=np.inf)))
        theta = max(0.0, -min(lo, lo_pt)) * d
        raw = (raw + theta * np.eye(d) / d) / (1.0 + theta)
        sigma = DensityMatrix(raw / float(np.real(np.trace(raw))))
    f_lo = fidelity(rho, sigma)

    # explicit dual solve, then exact repair
    y11 = cp.Variable((d, d), hermitian=True)
    y22 = cp.Variable((d, d), hermitian=True)
    lam = cp.Variable()
    corner = -0.5 * np.eye(d)
    dual_block = cp.bmat([[y11, corner], [corner, y22]])
    dcons = [dual_block >> 0]
    zvar = None
    if free.tag == "incoherent":
        dcons.append(cp.diag(y22) == lam * np.ones(d))
    else:
        zvar = cp.Variable((d, d), hermitian=True)
        dcons += [zvar >> 0, y22 + cp.partial_transpose(zvar, list(free.dims), 1) == lam * np.eye(d)]
    dprob = cp.Problem(cp.Minimize(cp.real(cp.trace(y11 @ np.asarray(rho.matrix))) + lam), dcons)
    try:
        dprob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        dprob.solve(solver=cp.SCS, eps=1e-9)
    if y11.value is None:
        return f_lo, 1.0, sigma

    y11_n = symmetrize(np.asarray(y11.value, dtype=complex))
    y22_n = symmetrize(np.asarray(y22.value, dtype=complex))
    if free.tag == "incoherent":
        lam_n = float(np.max(np.real(np.diag(y22_n))))
        y22_n = y22_n + np.diag(lam_n - np.real(np.diag(y22_n)))
    else:
        z_n = symmetrize(np.asarray(zvar.value, dtype=complex))
        lo_z = float(np.min(eigvals_hermitian(z_n, tol=np.inf)))
        if lo_z < 0:
            z_n = z_n + (-lo_z) * np.eye(d)
        m_block = symmetrize(y22_n + partial_transpose(z_n, free.dims, "B"))
        lam_n = float(np.max(eigvals_hermitian(m_block, tol=np.inf)))
        y22_n = y22_n + (lam_n * np.eye(d) - m_block)
    lifted = np.block([[y11_n, corner.astype(complex)], [corner.astype(complex), y22_n]])
    lo = float(np.min(eigvals_hermitian(symmetrize(lifted), tol=np.inf)))
    delta = max(0.0, -lo)
    f_hi = float(np.real(np.trace((y11_n + delta * np.eye(d)) @ rho.matrix))) + lam_n + delta
    f_hi = float(min(1.0, max(f_hi, f_lo)))
    return f_lo, f_hi, sigma


# ---------------------------------------------------------------------------
# the induced measure


def omega(measure: DistanceMeasure, free: FreeStateSet, rho: DensityMatrix, tol: float = 1e-6) -> float:
    """omega_D(rho) = min over the free set of D(rho, sigma)."""
    value, _gap = omega_certified(measure, free, rho, tol)
    return value


def omega_certified(measure: DistanceMeasure, free: FreeStateSet, rho: DensityMatrix, tol: float = 1e-6):
    """(value, certificate gap) of the induced measure."""
    if rho.dim != free.dim:
        raise DimensionMismatch(f"state dim {rho.dim} vs free set dim {free.dim}")
    if measure is DistanceMeasure.TRACE:
        if free.tag == "incoherent":
            res = c_trace(rho, tol=tol)
            return res.value, 0.5 * res.solution.gap
        bound = e1_ppt_bound(rho, free.dims, tol=tol)
        return 0.5 * bound.value, 0.5 * bound.gap
    if measure is DistanceMeasure.FIDELITY:
        # the fidelity sandwich is tight (~1e-9 wide), but sqrt(1 - F^2)
        # has unbounded slope at F = 1, so the reported distance gap
        # degrades to ~1e-5 for states nearly inside the free set; that
        # is conditioning of the measure, not certificate slack
        f_lo, f_hi, _sigma = _max_fidelity_free(rho, free)
        val = float(np.sqrt(max(0.0, 1.0 - f_lo * f_lo)))
        lower = float(np.sqrt(max(0.0, 1.0 - f_hi * f_hi)))
        return val, max(0.0, val - lower)
    if measure is DistanceMeasure.DMAX:
        if free.tag != "incoherent":
            raise UnsupportedCombination("max-relative entropy over the PPT relaxation is not shipped")
        _val, sol = c_robustness(rho, tol=tol, full=True)
        primal = max(1.0, sol.primal_value)
        dual = max(1.0, sol.dual_bound)  # Tr(D) >= Tr(rho) = 1 always
        return float(np.log2(primal)), float(np.log2(primal) - np.log2(dual))
    raise ValueError(f"unknown measure {measure}")
