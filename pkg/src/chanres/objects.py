"""States, channels and the coherence-free channel classes.

Channels are carried as Choi matrices in the convention

    J = sum_ij |i><j| (x) N(|i><j|),        N(rho) = Tr_in[(rho^T (x) I) J],

with the input system as the first tensor factor.  This makes the two
convex channel classes used throughout readable directly off the blocks
B_ij = N(|i><j|):

  * incoherent-preserving (MIO):  every diagonal block B_ii is diagonal;
  * dephasing-covariant  (DIO):   additionally every off-diagonal block
    B_ij (i != j) has zero diagonal.

Strictly-incoherent / incoherent-Kraus membership (SIO/IO) has no known
convex Choi description and is certified constructively from a supplied
Kraus set instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotPSD, ValidationError
from .linalg import (
    dagger,
    eigvals_hermitian,
    herm_eig,
    hermitian_basis,
    hermiticity_defect,
    kron,
    partial_trace,
    symmetrize,
)

STATE_EIG_TOL = 1e-10
STATE_TRACE_TOL = 1e-10
CHANNEL_TOL = 1e-9
MEMBERSHIP_TOL = 1e-8


def _frozen_array(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class DensityMatrix:
    """Positive unit-trace Hermitian operator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError("matrix_square", f"expected square matrix, got {m.shape}")
        if hermiticity_defect(m) > 1e-10:
            raise ValidationError(
                "hermitian", f"hermiticity defect {hermiticity_defect(m):.3e} exceeds 1e-10"
            )
        m = symmetrize(m)
        tr = float(m.trace().real)
        if abs(tr - 1.0) > STATE_TRACE_TOL:
            raise ValidationError("unit_trace", f"trace {tr!r} is not 1 within {STATE_TRACE_TOL}")
        lo = float(np.min(eigvals_hermitian(m)))
        if lo < -STATE_EIG_TOL:
            raise ValidationError("psd", f"eigenvalue {lo:.3e} below -{STATE_EIG_TOL}")
        object.__setattr__(self, "matrix", _frozen_array(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def pure(vec: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))

    @staticmethod
    def basis_state(dim: int, index: int) -> "DensityMatrix":
        m = np.zeros((dim, dim), dtype=complex)
        m[index, index] = 1.0
        return DensityMatrix(m)

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(dim, dtype=complex) / dim)

    @staticmethod
    def diagonal(populations) -> "DensityMatrix":
        return DensityMatrix(np.diag(np.asarray(populations, dtype=complex)))


def dephase(m: np.ndarray) -> np.ndarray:
    """Project a matrix onto its diagonal (the map called Delta below)."""
    return np.diag(np.diag(m)).astype(complex)


# ---------------------------------------------------------------------------
# channels


def kraus_to_choi(kraus, dim_in: int | None = None, dim_out: int | None = None) -> np.ndarray:
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    if not ks:
        raise ValidationError("kraus_shape", "empty Kraus list")
    d_out, d_in = ks[0].shape
    dim_in = dim_in or d_in
    dim_out = dim_out or d_out
    for k in ks:
        if k.shape != (dim_out, dim_in):
            raise ValidationError("kraus_shape", f"Kraus shapes disagree: {k.shape} vs ({dim_out},{dim_in})")
    j = np.zeros((dim_in * dim_out, dim_in * dim_out), dtype=complex)
    for k in ks:
        w = k.T.reshape(-1)  # w[(i,a)] = K[a,i] matches the |i>(x)K|i> stacking
        j += np.outer(w, w.conj())
    return j


def choi_to_kraus(choi: np.ndarray, dim_in: int, dim_out: int, tol: float = 1e-10):
    """Kraus operators of a PSD Choi matrix (rank = #eigenvalues above tol)."""
    vals, vecs = herm_eig(np.asarray(choi, dtype=complex))
    if float(np.min(vals)) < -CHANNEL_TOL:
        raise NotPSD(f"Choi matrix has eigenvalue {float(np.min(vals)):.3e}")
    ks = []
    for lam, v in zip(vals, vecs.T):
        if lam > tol:
            ks.append(np.sqrt(lam) * v.reshape(dim_in, dim_out).T)
    return ks


def apply_choi(choi: np.ndarray, dim_in: int, dim_out: int, x: np.ndarray) -> np.ndarray:
    """Channel action on an arbitrary (not necessarily Hermitian) matrix."""
    jr = choi.reshape(dim_in, dim_out, dim_in, dim_out)
    return np.einsum("ij,iajb->ab", x, jr)


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map stored as a Choi matrix with an optional Kraus factorization."""

    dim_in: int
    dim_out: int
    choi: np.ndarray
    kraus: tuple | None = None
    name: str | None = None

    def __post_init__(self):
        j = np.asarray(self.choi, dtype=complex)
        n = self.dim_in * self.dim_out
        if j.shape != (n, n):
            raise ValidationError("choi_shape", f"Choi shape {j.shape}, expected ({n},{n})")
        if hermiticity_defect(j) > 1e-9:
            raise ValidationError("choi_hermitian", f"defect {hermiticity_defect(j):.3e} exceeds 1e-9")
        j = symmetrize(j)
        if self.kraus is not None:
            ks = tuple(_frozen_array(k) for k in self.kraus)
            comp = sum(dagger(k) @ k for k in ks) - np.eye(self.dim_in)
            if float(np.max(np.abs(comp))) > CHANNEL_TOL:
                raise ValidationError(
                    "kraus_completeness", f"sum K†K deviates from identity by {float(np.max(np.abs(comp))):.3e}"
                )
            rebuilt = kraus_to_choi(ks, self.dim_in, self.dim_out)
            if float(np.max(np.abs(rebuilt - j))) > CHANNEL_TOL:
                raise ValidationError(
                    "kraus_choi_consistency",
                    f"Choi rebuilt from Kraus deviates by {float(np.max(np.abs(rebuilt - j))):.3e}",
                )
            object.__setattr__(self, "kraus", ks)
        lo = float(np.min(eigvals_hermitian(j)))
        if lo < -CHANNEL_TOL:
            raise ValidationError("choi_psd", f"Choi eigenvalue {lo:.3e} below -{CHANNEL_TOL}")
        tp = partial_trace(j, (self.dim_in, self.dim_out), "B") - np.eye(self.dim_in)
        if float(np.max(np.abs(tp))) > CHANNEL_TOL:
            raise ValidationError(
                "trace_preserving", f"Tr_out(choi) deviates from identity by {float(np.max(np.abs(tp))):.3e}"
            )
        object.__setattr__(self, "choi", _frozen_array(j))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_kraus(kraus, name: str | None = None) -> "QuantumChannel":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        d_out, d_in = ks[0].shape
        return QuantumChannel(d_in, d_out, kraus_to_choi(ks, d_in, d_out), tuple(ks), name)

    @staticmethod
    def from_choi(choi, dim_in: int, dim_out: int, name: str | None = None) -> "QuantumChannel":
        return QuantumChannel(dim_in, dim_out, np.asarray(choi, dtype=complex), None, name)

    # -- action ------------------------------------------------------------

    def apply_matrix(self, x: np.ndarray) -> np.ndarray:
        return apply_choi(self.choi, self.dim_in, self.dim_out, x)

    def __call__(self, rho: "DensityMatrix") -> "DensityMatrix":
        return apply_channel(self, rho)

    def blocks(self) -> np.ndarray:
        """Choi reshaped so blocks()[i, :, j, :] = N(|i><j|)."""
        return self.choi.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    def with_kraus(self) -> "QuantumChannel":
        if self.kraus is not None:
            return self
        ks = choi_to_kraus(self.choi, self.dim_in, self.dim_out)
        return QuantumChannel(self.dim_in, self.dim_out, self.choi, tuple(ks), self.name)


def apply_channel(channel: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != channel.dim_in:
        raise DimensionMismatch(f"state dim {rho.dim} vs channel input dim {channel.dim_in}")
    return DensityMatrix(channel.apply_matrix(rho.matrix))


class AdjointMap:
    """Heisenberg-picture adjoint of a channel: Tr[M(A) B] = Tr[A N(B)].

    The adjoint of a trace-preserving map is unital but generally not
    trace preserving, so it is exposed as a bare linear map rather than a
    QuantumChannel.
    """

    def __init__(self, channel: QuantumChannel):
        self._blocks = channel.blocks()
        self.dim_in = channel.dim_out  # adjoint runs backwards
        self.dim_out = channel.dim_in

    def apply_matrix(self, a: np.ndarray) -> np.ndarray:
        # M(A)[j,i] = Tr[A · N(|i><j|)]
        return np.einsum("ab,ibja->ji", np.asarray(a, dtype=complex), self._blocks)

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return self.apply_matrix(a)


def adjoint_channel(channel: QuantumChannel) -> AdjointMap:
    return AdjointMap(channel)


# -- channel algebra --------------------------------------------------------


def identity_channel(dim: int) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.eye(dim, dtype=complex)], name="identity")


def unitary_channel(u: np.ndarray, name: str | None = None) -> QuantumChannel:
    from .errors import NotUnitary

    u = np.asarray(u, dtype=complex)
    if float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0])))) > 1e-10:
        raise NotUnitary("matrix is not unitary within 1e-10")
    return QuantumChannel.from_kraus([u], name=name)


def dephasing_channel(dim: int) -> QuantumChannel:
    """The full dephasing map: rho -> sum_i <i|rho|i> |i><i|."""
    if dim < 2:
        raise ValueError("dephasing needs dim >= 2")
    ks = []
    for i in range(dim):
        k = np.zeros((dim, dim), dtype=complex)
        k[i, i] = 1.0
        ks.append(k)
    return QuantumChannel.from_kraus(ks, name="dephasing")


def replacement_channel(sigma: DensityMatrix, dim_in: int | None = None) -> QuantumChannel:
    """Constant channel mapping every input to ``sigma``.

    When sigma is diagonal the canonical Kraus set {sqrt(q_j) |j><i|} is
    attached; each operator has a single nonzero entry, which certifies
    strict incoherence (see certify_sio_kraus).
    """
    d_in = dim_in or sigma.dim
    d_out = sigma.dim
    diag = np.diag(sigma.matrix)
    if float(np.max(np.abs(sigma.matrix - np.diag(diag)))) <= 1e-12:
        ks = []
        for i in range(d_in):
            for j in range(d_out):
                if diag[j].real <= 0:
                    continue
                k = np.zeros((d_out, d_in), dtype=complex)
                k[j, i] = np.sqrt(diag[j].real)
                ks.append(k)
    else:
        vals, vecs = herm_eig(sigma.matrix)
        ks = []
        for i in range(d_in):
            for lam, v in zip(vals, vecs.T):
                if lam > 1e-12:
                    ks.append(np.sqrt(lam) * np.outer(v, np.eye(d_in)[i]))
    return QuantumChannel(d_in, d_out, kraus_to_choi(ks, d_in, d_out), tuple(ks), name="replacement")


def compose_channels(after: QuantumChannel, before: QuantumChannel) -> QuantumChannel:
    """Channel performing ``before`` then ``after``."""
    if before.dim_out != after.dim_in:
        raise DimensionMismatch(f"cannot compose: {before.dim_out} -> {after.dim_in}")
    n = before.blocks()
    m = after.blocks()
    j = np.einsum("ikjl,kalb->iajb", n, m).reshape(
        before.dim_in * after.dim_out, before.dim_in * after.dim_out
    )
    kraus = None
    if before.kraus is not None and after.kraus is not None:
        kraus = tuple(a @ b for a in after.kraus for b in before.kraus)
    return QuantumChannel(before.dim_in, after.dim_out, j, kraus)


def tensor_channels(first: QuantumChannel, second: QuantumChannel) -> QuantumChannel:
    j1 = first.blocks()
    j2 = second.blocks()
    d_in = first.dim_in * second.dim_in
    d_out = first.dim_out * second.dim_out
    j = np.einsum("iajb,kcld->ikacjlbd", j1, j2).reshape(d_in * d_out, d_in * d_out)
    kraus = None
    if first.kraus is not None and second.kraus is not None:
        kraus = tuple(kron(a, b) for a in first.kraus for b in second.kraus)
    return QuantumChannel(d_in, d_out, j, kraus)


def mix_channels(channels, weights) -> QuantumChannel:
    """Convex combination sum_i p_i N_i."""
    weights = np.asarray(weights, dtype=float)
    if abs(weights.sum() - 1.0) > 1e-12 or np.any(weights < -1e-15):
        raise ValueError("weights must form a probability vector")
    j = sum(p * c.choi for p, c in zip(weights, channels))
    kraus = None
    if all(c.kraus is not None for c in channels):
        kraus = tuple(np.sqrt(p) * k for p, c in zip(weights, channels) for k in c.kraus)
    d_in, d_out = channels[0].dim_in, channels[0].dim_out
    return QuantumChannel(d_in, d_out, j, kraus)


def permutation_channel(perm) -> QuantumChannel:
    perm = list(perm)
    d = len(perm)
    u = np.zeros((d, d), dtype=complex)
    for col, row in enumerate(perm):
        u[row, col] = 1.0
    return unitary_channel(u, name="permutation")


# ---------------------------------------------------------------------------
# membership tests


def is_mio(channel: QuantumChannel, tol: float = MEMBERSHIP_TOL) -> bool:
    """Does the channel map every incoherent state to an incoherent state?

    Equivalent to every diagonal Choi block N(|i><i|) being diagonal; by
    linearity checking the basis projectors covers all diagonal inputs.
    """
    if channel.dim_in != channel.dim_out:
        raise DimensionMismatch("membership tests assume equal input/output dimension")
    b = channel.blocks()
    for i in range(channel.dim_in):
        block = b[i, :, i, :]
        if float(np.max(np.abs(block - np.diag(np.diag(block))))) > tol:
            return False
    return True


def is_dio(channel: QuantumChannel, tol: float = MEMBERSHIP_TOL) -> bool:
    """Does the channel commute with the full dephasing map?"""
    if not is_mio(channel, tol):
        return False
    b = channel.blocks()
    d = channel.dim_in
    for i in range(d):
        for j in range(d):
            if i != j and float(np.max(np.abs(np.diag(b[i, :, j, :])))) > tol:
                return False
    return True


def certify_io_kraus(kraus, tol: float = MEMBERSHIP_TOL) -> bool:
    """Check that each Kraus operator maps incoherent states to incoherent
    states (K |i><i| K† diagonal for every basis index i).

    The defining condition quantifies over all incoherent states; checking
    the basis projectors suffices by linearity.
    """
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        for i in range(k.shape[1]):
            col = k[:, i]
            out = np.outer(col, col.conj())
            if float(np.max(np.abs(out - np.diag(np.diag(out))))) > tol:
                return False
    return True


def certify_sio_kraus(kraus, tol: float = MEMBERSHIP_TOL) -> bool:
    """Check the strict-incoherence condition Delta(K E K†) = K Delta(E) K†
    on the full operator basis E = |i><j|.

    The condition as stated quantifies over all states; the operator-basis
    check is equivalent by linearity of both sides.
    """
    for k in kraus:
        k = np.asarray(k, dtype=complex)
        d_in = k.shape[1]
        for i in range(d_in):
            for j in range(d_in):
                e = np.outer(k[:, i], k[:, j].conj())  # K |i><j| K†
                rhs = e if i == j else np.zeros_like(e)
                if float(np.max(np.abs(dephase(e) - rhs))) > tol:
                    return False
    return True


# ---------------------------------------------------------------------------
# convex class descriptions


@dataclass(frozen=True)
class FreeChannelClass:
    """Convex Choi-space description of a coherence-free channel class.

    ``constraints`` lists Hermitian pairs (G, g) meaning Tr[G J] = g for
    the Choi matrix J, on top of the CPTP constraints.  The DIO list is a
    strict superset of the MIO list.
    """

    tag: str
    dim: int
    constraints: tuple = field(repr=False)

    @staticmethod
    def mio(dim: int) -> "FreeChannelClass":
        return FreeChannelClass("MIO", dim, tuple(_mio_constraints(dim)))

    @staticmethod
    def dio(dim: int) -> "FreeChannelClass":
        cons = _mio_constraints(dim) + _dio_extra_constraints(dim)
        return FreeChannelClass("DIO", dim, tuple(cons))

    @staticmethod
    def from_tag(tag: str, dim: int) -> "FreeChannelClass":
        t = tag.strip().upper()
        if t == "MIO":
            return FreeChannelClass.mio(dim)
        if t == "DIO":
            return FreeChannelClass.dio(dim)
        raise ValueError(f"no convex Choi description for class {tag!r}")

    def contains(self, channel: QuantumChannel, tol: float = MEMBERSHIP_TOL) -> bool:
        return is_dio(channel, tol) if self.tag == "DIO" else is_mio(channel, tol)


def _embed(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return kron(left, right)


def _mio_constraints(d: int):
    cons = []
    for i in range(d):
        proj = np.zeros((d, d), dtype=complex)
        proj[i, i] = 1.0
        for k in range(d):
            for l in range(k + 1, d):
                c_re = np.zeros((d, d), dtype=complex)
                c_re[k, l] = 1.0
                c_re[l, k] = 1.0
                cons.append((_embed(proj, c_re), 0.0))
                c_im = np.zeros((d, d), dtype=complex)
                c_im[k, l] = 1j
                c_im[l, k] = -1j
                cons.append((_embed(proj, c_im), 0.0))
    return cons


def _dio_extra_constraints(d: int):
    cons = []
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(d):
                diag_k = np.zeros((d, d), dtype=complex)
                diag_k[k, k] = 1.0
                e_re = np.zeros((d, d), dtype=complex)
                e_re[i, j] = 1.0
                e_re[j, i] = 1.0
                cons.append((_embed(e_re, diag_k), 0.0))
                e_im = np.zeros((d, d), dtype=complex)
                e_im[i, j] = 1j
                e_im[j, i] = -1j
                cons.append((_embed(e_im, diag_k), 0.0))
    return cons


def trace_preserving_constraints(dim_in: int, dim_out: int):
    """(G, g) pairs encoding Tr_out(J) = I as Tr[G J] = g."""
    cons = []
    for e in hermitian_basis(dim_in):
        cons.append((_embed(e, np.eye(dim_out, dtype=complex)), float(e.trace().real)))
    return cons


# ---------------------------------------------------------------------------
# random generators


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_state_vector(dim: int, rng) -> np.ndarray:
    rng = as_rng(rng)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_pure_state(dim: int, rng) -> DensityMatrix:
    return DensityMatrix.pure(random_state_vector(dim, rng))


def random_density_matrix(dim: int, rng, rank: int | None = None) -> DensityMatrix:
    rng = as_rng(rng)
    r = rank or dim
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ dagger(g)
    return DensityMatrix(m / m.trace().real)


def haar_random_unitary(dim: int, rng) -> np.ndarray:
    rng = as_rng(rng)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_channel(dim_in: int, rng, dim_out: int | None = None, kraus_rank: int | None = None) -> QuantumChannel:
    """Random CPTP map: Gaussian Kraus seeds with the stacked block
    orthonormalized to enforce trace preservation."""
    rng = as_rng(rng)
    d_out = dim_out or dim_in
    k = kraus_rank or dim_in
    g = rng.normal(size=(k * d_out, dim_in)) + 1j * rng.normal(size=(k * d_out, dim_in))
    q, _ = np.linalg.qr(g)  # columns orthonormal: sum_i K_i† K_i = I
    ks = [q[i * d_out : (i + 1) * d_out, :] for i in range(k)]
    return QuantumChannel.from_kraus(ks, name="random")


# ---------------------------------------------------------------------------
# JSON channel specs


def _matrix_from_pairs(rows, what: str) -> np.ndarray:
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("data_format", f"{what}: entries must be [re, im] pairs ({exc})")
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError("data_format", f"{what}: expected rows of [re, im] pairs, got shape {arr.shape}")
    return arr[:, :, 0] + 1j * arr[:, :, 1]


def _matrix_to_pairs(m: np.ndarray):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def channel_from_dict(spec: dict) -> QuantumChannel:
    for key in ("dim_in", "dim_out", "repr", "data"):
        if key not in spec:
            raise ValidationError("missing_field", f"channel spec lacks required field {key!r}")
    d_in, d_out = int(spec["dim_in"]), int(spec["dim_out"])
    representation = spec["repr"]
    name = spec.get("name")
    if representation == "choi":
        j = _matrix_from_pairs(spec["data"], "choi")
        return QuantumChannel(d_in, d_out, j, None, name)
    if representation == "kraus":
        ks = [_matrix_from_pairs(k, f"kraus[{i}]") for i, k in enumerate(spec["data"])]
        for k in ks:
            if k.shape != (d_out, d_in):
                raise ValidationError("kraus_shape", f"Kraus shape {k.shape}, expected ({d_out},{d_in})")
        return QuantumChannel(d_in, d_out, kraus_to_choi(ks, d_in, d_out), tuple(ks), name)
    raise ValidationError("repr", f"repr must be 'kraus' or 'choi', got {representation!r}")


def channel_to_dict(channel: QuantumChannel) -> dict:
    if channel.kraus is not None:
        data = [_matrix_to_pairs(k) for k in channel.kraus]
        representation = "kraus"
    else:
        data = _matrix_to_pairs(channel.choi)
        representation = "choi"
    out = {
        "dim_in": channel.dim_in,
        "dim_out": channel.dim_out,
        "repr": representation,
        "data": data,
    }
    if channel.name:
        out["name"] = channel.name
    return out


def load_channel(path) -> QuantumChannel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError("json", f"malformed JSON: {exc}")
    if not isinstance(spec, dict):
        raise ValidationError("json", "channel spec must be a JSON object")
    return channel_from_dict(spec)
