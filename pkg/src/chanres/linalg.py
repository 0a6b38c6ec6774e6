"""Dense complex matrix kernel.

Hermitian eigendecomposition, trace norm, tensor products and partial
traces.  Everything downstream (state validation, distance measures,
optimization certificates) reduces to these few primitives, so they are
kept self-contained and robust rather than fast: the eigensolver is a
cyclic Jacobi iteration on the real symmetric embedding of the Hermitian
input, which is more than adequate for the dimensions used here (<= 32).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NonSquare, NotHermitian

HERMITIAN_TOL = 1e-10
MAX_JACOBI_SWEEPS = 10_000


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def frobenius(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entrywise deviation of ``a`` from its conjugate transpose."""
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return a.shape[0] == a.shape[1] and hermiticity_defect(a) <= tol


def symmetrize(a: np.ndarray) -> np.ndarray:
    """(A + A†)/2, used to scrub round-off before decompositions."""
    return 0.5 * (a + dagger(a))


def _jacobi_real_symmetric(a: np.ndarray, eps: float, want_vectors: bool = True):
    """Cyclic Jacobi sweeps on a real symmetric matrix.

    Returns (eigenvalues, orthogonal eigenvector columns or None); raises
    NoConvergence if the off-diagonal mass does not drop below ``eps``
    within the sweep cap.
    """
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n) if want_vectors else None
    for _ in range(MAX_JACOBI_SWEEPS):
        off = np.sqrt(2.0 * np.sum(np.tril(a, -1) ** 2))
        if off <= eps:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:  # rotation angle ~ 1/(2 theta); avoid overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) if theta != 0 else 1.0
                    t /= abs(theta) + np.sqrt(1.0 + theta * theta)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                if want_vectors:
                    v_p = v[:, p].copy()
                    v_q = v[:, q].copy()
                    v[:, p] = c * v_p - s * v_q
                    v[:, q] = s * v_p + c * v_q
    raise NoConvergence(f"Jacobi iteration exceeded {MAX_JACOBI_SWEEPS} sweeps")


def herm_eig(a: np.ndarray, tol: float = HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Embeds A = X + iY into the real symmetric [[X, -Y], [Y, X]], runs
    cyclic Jacobi sweeps, and maps the doubled real spectrum back to the
    complex one: a real eigenvector (u, w) of the embedding yields the
    complex eigenvector u + iw, and each complex eigenvector appears twice
    (once as i times itself), so a Gram-Schmidt pass keeps one copy per
    pair.

    Returns
    -------
    (eigenvalues, vectors)
        Eigenvalues sorted descending; ``vectors`` unitary with column k
        the eigenvector of eigenvalue k, so A = V diag(w) V†.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    a = symmetrize(np.asarray(a, dtype=complex))
    d = a.shape[0]
    if d == 1:
        return np.array([a[0, 0].real]), np.eye(1, dtype=complex)

    x, y = a.real, a.imag
    m = np.block([[x, -y], [y, x]])
    scale = max(1.0, frobenius(m))
    vals, vecs = _jacobi_real_symmetric(m, eps=1e-14 * scale)

    order = np.argsort(-vals)
    eigenvalues = np.empty(d)
    vectors = np.zeros((d, d), dtype=complex)
    found = 0
    for idx in order:
        if found == d:
            break
        cand = vecs[:d, idx] + 1j * vecs[d:, idx]
        # remove the copies already kept (each complex eigenvector shows up
        # twice in the embedding, as v and iv)
        cand = cand - vectors[:, :found] @ (dagger(vectors[:, :found]) @ cand)
        norm = np.linalg.norm(cand)
        if norm > 0.5:
            vectors[:, found] = cand / norm
            eigenvalues[found] = vals[idx]
            found += 1
    if found != d:
        raise NoConvergence("eigenvector pairing failed on the real embedding")
    return eigenvalues, vectors


def eigvals_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Descending eigenvalues only (same Jacobi path as herm_eig).

    Skips eigenvector accumulation: the real embedding carries each complex
    eigenvalue exactly twice, so every other entry of its sorted spectrum is
    the complex spectrum.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    a = symmetrize(np.asarray(a, dtype=complex))
    if a.shape[0] == 1:
        return np.array([a[0, 0].real])
    m = np.block([[a.real, -a.imag], [a.imag, a.real]])
    scale = max(1.0, frobenius(m))
    vals, _ = _jacobi_real_symmetric(m, eps=1e-14 * scale, want_vectors=False)
    return np.sort(vals)[::-1][0::2].copy()


def trace_norm(a: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input the sum of |eigenvalues|."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"trace norm defined here for square matrices, got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if hermiticity_defect(a) <= HERMITIAN_TOL * scale:
        vals = eigvals_hermitian(a, tol=np.inf)
        return float(np.sum(np.abs(vals)))
    vals = eigvals_hermitian(dagger(a) @ a, tol=np.inf)
    return float(np.sum(np.sqrt(np.clip(vals, 0.0, None))))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value (largest |eigenvalue| for Hermitian input)."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
    if hermiticity_defect(a) <= HERMITIAN_TOL * scale:
        vals = eigvals_hermitian(a, tol=np.inf)
        return float(np.max(np.abs(vals)))
    vals = eigvals_hermitian(dagger(a) @ a, tol=np.inf)
    return float(np.sqrt(max(0.0, float(np.max(vals)))))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def _split_dims(x: np.ndarray, dims) -> tuple[int, int]:
    d_a, d_b = dims
    if x.ndim != 2 or x.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch(
            f"matrix of shape {x.shape} does not factor as ({d_a}*{d_b})^2"
        )
    return d_a, d_b


def partial_trace(x: np.ndarray, dims, which: str) -> np.ndarray:
    """Trace out subsystem ``which`` ('A' or 'B') of a bipartite operator."""
    d_a, d_b = _split_dims(x, dims)
    t = x.reshape(d_a, d_b, d_a, d_b)
    if which == "A":
        return np.einsum("abac->bc", t)
    if which == "B":
        return np.einsum("abcb->ac", t)
    raise ValueError(f"which must be 'A' or 'B', got {which!r}")


def partial_transpose(x: np.ndarray, dims, which: str = "B") -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator."""
    d_a, d_b = _split_dims(x, dims)
    t = x.reshape(d_a, d_b, d_a, d_b)
    if which == "A":
        t = np.einsum("abcd->cbad", t)
    elif which == "B":
        t = np.einsum("abcd->adcb", t)
    else:
        raise ValueError(f"which must be 'A' or 'B', got {which!r}")
    return t.reshape(d_a * d_b, d_a * d_b)


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (Frobenius) basis of d x d Hermitian matrices.

    Order: the d diagonal projectors first, then for each i < j the pair
    (|i><j| + |j><i|)/sqrt(2) and i(|i><j| - |j><i|)/sqrt(2).
    """
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = inv_sqrt2
            e[j, i] = inv_sqrt2
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = 1j * inv_sqrt2
            e[j, i] = -1j * inv_sqrt2
            basis.append(e)
    return basis
