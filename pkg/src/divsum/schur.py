"""Eigen-structure kernels: complex Schur form, cluster reordering, triangular Sylvester solves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, NumericalFailureError, SingularSylvesterError
from .linalg import as_cmatrix

#: Relative spectral-gap threshold below which a Sylvester system is declared singular.
SYLVESTER_SEP_RTOL = 1e-8


@dataclass(frozen=True)
class SchurForm:
    """Unitary similarity A = Q R Q* with R upper triangular."""

    q: np.ndarray
    r: np.ndarray

    @property
    def dim(self) -> int:
        return self.r.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.r).copy()

    def restore(self) -> np.ndarray:
        """Reassemble Q R Q*."""
        return self.q @ self.r @ self.q.conj().T


def schur(a) -> SchurForm:
    """Complex Schur decomposition; subdiagonal is exactly zeroed after the factorization."""
    m = as_cmatrix(a)
    if m.shape[0] == 0:
        return SchurForm(q=m.copy(), r=m.copy())
    try:
        r, q = scipy.linalg.schur(m, output="complex")
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"Schur iteration did not converge: {exc}") from exc
    return SchurForm(q=np.ascontiguousarray(q), r=np.triu(r))


def _swap_rotation(a: complex, b: complex, c: complex) -> np.ndarray | None:
    """2x2 unitary V with V* [[a, b], [0, c]] V upper triangular, diagonal (c, a).

    Returns None when the entries already commute with the swap (a == c or the
    block is diagonal with equal values), i.e. the swap is a no-op.
    """
    if a == c:
        return None
    # First column of V is the unit eigenvector of the block for eigenvalue c.
    v0, v1 = b, c - a
    scale = np.hypot(abs(v0), abs(v1))
    if scale == 0.0:  # pragma: no cover - unreachable given a != c
        return None
    v0, v1 = v0 / scale, v1 / scale
    return np.array([[v0, -np.conj(v1)], [v1, np.conj(v0)]], dtype=np.complex128)


def reorder_schur(sf: SchurForm, cluster_of) -> tuple[SchurForm, list[int]]:
    """Bubble equal cluster ids into contiguous diagonal runs via adjacent 2x2 swaps.

    ``cluster_of`` maps each diagonal position 0..d-1 to a cluster id; after
    reordering the diagonal carries the clusters in ascending id order.
    Returns the reordered form (with the accumulated unitary folded into
    ``q``) and the diagonal's cluster id sequence after reordering.
    """
    d = sf.dim
    labels = []
    for i in range(d):
        try:
            labels.append(cluster_of[i])
        except (KeyError, IndexError) as exc:
            raise InvalidInputError(f"cluster assignment missing position {i}") from exc

    order = {lab: pos for pos, lab in enumerate(sorted(set(labels)))}
    rank = [order[lab] for lab in labels]

    r = sf.r.copy()
    q = sf.q.copy()
    # Bubble sort on cluster ranks; each exchange is a unitary similarity on R.
    changed = True
    while changed:
        changed = False
        for i in range(d - 1):
            if rank[i] > rank[i + 1]:
                a, b, c = r[i, i], r[i, i + 1], r[i + 1, i + 1]
                v = _swap_rotation(a, b, c)
                if v is not None:
                    r[:, i : i + 2] = r[:, i : i + 2] @ v
                    r[i : i + 2, :] = v.conj().T @ r[i : i + 2, :]
                    q[:, i : i + 2] = q[:, i : i + 2] @ v
                    # The exact similarity carries the old diagonal values across
                    # the swap; pin them and re-zero the subdiagonal entry.
                    r[i, i] = c
                    r[i + 1, i + 1] = a
                    r[i + 1, i] = 0.0
                rank[i], rank[i + 1] = rank[i + 1], rank[i]
                labels[i], labels[i + 1] = labels[i + 1], labels[i]
                changed = True
    return SchurForm(q=q, r=r), labels


def sylvester_solve(a, b, c) -> np.ndarray:
    """Solve A X - X B = C for upper-triangular A and B by back-substitution.

    Requires the spectra of A and B to be disjoint; raises
    SingularSylvesterError (carrying the colliding pair) otherwise.
    """
    ma = as_cmatrix(a, name="A")
    mb = as_cmatrix(b, name="B")
    mc = np.asarray(c, dtype=np.complex128)
    p, qdim = ma.shape[0], mb.shape[0]
    if mc.shape != (p, qdim):
        raise InvalidInputError(f"right-hand side must be {p}x{qdim}, got {mc.shape}")

    alphas = np.diag(ma)
    betas = np.diag(mb)
    tol = SYLVESTER_SEP_RTOL * (np.linalg.norm(ma, 2) + np.linalg.norm(mb, 2) + 1e-300)
    gaps = np.abs(alphas[:, None] - betas[None, :])
    if gaps.size and gaps.min() <= tol:
        i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
        raise SingularSylvesterError(
            f"spectra of A and B collide: |{alphas[i]} - {betas[j]}| <= {tol}",
            (complex(alphas[i]), complex(betas[j])),
        )

    x = np.zeros((p, qdim), dtype=np.complex128)
    for j in range(qdim):
        # (A - b_jj I) x_j = c_j + X[:, :j] B[:j, j]
        rhs = mc[:, j].copy()
        if j > 0:
            rhs += x[:, :j] @ mb[:j, j]
        shifted = ma - betas[j] * np.eye(p, dtype=np.complex128)
        col = np.zeros(p, dtype=np.complex128)
        for i in range(p - 1, -1, -1):
            acc = rhs[i]
            if i + 1 < p:
                acc -= shifted[i, i + 1 :] @ col[i + 1 :]
            col[i] = acc / shifted[i, i]
        x[:, j] = col
    return x
