"""Dense complex linear algebra: eigendecomposition, expm, Jordan structure.

The eigensolver contract is the residual bound, not the algorithm; we rely on
LAPACK's Hessenberg + shifted-QR path via numpy.  Jordan-block estimation
clusters nearby eigenvalues and reads the Weyr characteristic off numerical
ranks of powers of the shifted matrix, with gap-based rank decisions so the
result survives ill-conditioned eigenbases.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "DIM_CAP",
    "SpectralDecomposition",
    "NumericalError",
    "eigendecompose",
    "expm",
    "jordan_structure",
]

DIM_CAP = 4096
JORDAN_DIM_CAP = 64


class NumericalError(RuntimeError):
    """Eigensolver failure, overflow, or quadrature breakdown."""


@dataclass
class SpectralDecomposition:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    condition_estimate: float
    jordan_blocks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def defective(self) -> bool:
        return any(size > 1 for _, size in self.jordan_blocks)


def _sort_key(values):
    # real part descending, imaginary part ascending
    return np.lexsort((values.imag, -values.real))


def eigendecompose(a, tol: float = 1e-10, jordan: bool = True) -> SpectralDecomposition:
    """Full right eigendecomposition with defective-cluster detection.

    Eigenvalues are sorted by (Re desc, Im asc).  For matrices up to
    ``JORDAN_DIM_CAP`` the Jordan structure of clustered eigenvalues is
    estimated as well; larger matrices report trivial 1-blocks.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n > DIM_CAP:
        raise NumericalError(f"dimension {n} exceeds cap {DIM_CAP}")
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalError(f"eigensolver did not converge: {exc}") from exc

    order = _sort_key(vals)
    vals = vals[order]
    vecs = vecs[:, order]
    cond = float(np.linalg.cond(vecs))

    norm_a = np.linalg.norm(a, 2)
    warns = []
    if norm_a > 0:
        residual = np.linalg.norm(a @ vecs - vecs * vals, 2)
        if residual > max(tol, 1e3 * n * np.finfo(float).eps) * norm_a * max(cond, 1.0):
            warns.append(f"large eigenpair residual {residual:.3e}")

    if jordan and n <= JORDAN_DIM_CAP:
        blocks, jwarns = _jordan_blocks(a, vals)
        warns.extend(jwarns)
    else:
        blocks = [(v, 1) for v in vals]

    return SpectralDecomposition(
        eigenvalues=vals,
        right_eigenvectors=vecs,
        condition_estimate=cond,
        jordan_blocks=blocks,
        warnings=warns,
    )


def expm(a, t: float = 1.0):
    """e^{A t} by scaling-and-squaring with a Pade approximant (scipy backend)."""
    a = np.asarray(a, dtype=complex)
    if not np.isfinite(t):
        raise NumericalError("non-finite time in expm")
    out = scipy.linalg.expm(a * t)
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"overflow in expm at t = {t}")
    return out


def _cluster(values, cluster_tol):
    """Greedy transitive clustering of eigenvalues within ``cluster_tol``."""
    n = len(values)
    order = np.lexsort((values.imag, values.real))
    groups = []
    for idx in order:
        placed = False
        for grp in groups:
            if any(abs(values[idx] - values[k]) <= cluster_tol for k in grp):
                grp.append(idx)
                placed = True
                break
        if not placed:
            groups.append([idx])
    return groups


def _cluster_rank(mat, m, floor, scale_k):
    """Numerical rank of a shifted-matrix power within a cluster of size m.

    The true rank lies in [n - m, n - 1]; the cut is placed at the largest
    relative gap of the singular spectrum inside that range, so the decision
    is scale-free and survives ill-conditioned eigenbases.
    """
    n = mat.shape[0]
    s = np.linalg.svd(mat, compute_uv=False)
    s = np.maximum(s, floor)
    best_r, best_gap = n - 1, 0.0
    for r in range(n - m, n):
        gap = scale_k / s[0] if r == 0 else s[r - 1] / s[r]
        if gap > best_gap:
            best_gap, best_r = gap, r
    return best_r


def _jordan_blocks(a, vals=None, cluster_tol=None):
    """Estimate Jordan blocks from ranks of powers of the shifted cluster block."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    norm_a = max(np.linalg.norm(a, 2), np.finfo(float).tiny)
    if cluster_tol is None:
        # eigenvalues of a size-k Jordan block perturbed at machine precision
        # scatter like eps^(1/k); 1e-4 relative covers blocks up to size 4
        # while staying far below physically distinct decay rates
        cluster_tol = 1e-4 * norm_a
    if vals is None:
        vals = np.linalg.eigvals(a)

    groups = _cluster(vals, cluster_tol)
    warns = []
    centers = [np.mean(vals[grp]) for grp in groups]
    for i, ci in enumerate(centers):
        for cj in centers[i + 1:]:
            if abs(ci - cj) <= 2 * cluster_tol:
                warns.append(
                    f"ambiguous clustering: centers {ci:.6g} and {cj:.6g} "
                    f"within twice the cluster tolerance"
                )

    blocks = []
    eye = np.eye(n, dtype=complex)
    for grp, center in zip(groups, centers):
        m = len(grp)
        if m == 1:
            blocks.append((vals[grp[0]], 1))
            continue
        # Weyr characteristic from ranks of powers of the shifted matrix.
        B = a - center * eye
        scale = max(np.linalg.norm(B, 2), np.finfo(float).eps * norm_a)
        ranks = [n]
        P = eye
        for k in range(1, m + 1):
            P = P @ B
            floor = n * np.finfo(float).eps * scale ** k
            ranks.append(_cluster_rank(P, m, floor, scale ** k))
        # number of blocks of size >= k is r_{k-1} - r_k
        sizes = []
        for k in range(1, m + 1):
            n_ge_k = ranks[k - 1] - ranks[k]
            n_ge_next = ranks[k] - ranks[k + 1] if k < m else 0
            sizes.extend([k] * max(n_ge_k - n_ge_next, 0))
        if sum(sizes) != m:  # degenerate thresholding; report semisimple
            warns.append(f"inconsistent rank profile for cluster at {center:.6g}")
            sizes = [1] * m
        for size in sorted(sizes, reverse=True):
            blocks.append((center, size))

    blocks.sort(key=lambda b: (-b[0].real, b[0].imag, -b[1]))
    return blocks, warns


def jordan_structure(a, cluster_tol: float | None = None):
    """Eigenvalue clusters with inferred Jordan block sizes.

    Returns a list of ``(eigenvalue, [block sizes])`` per cluster, plus a list
    of warnings.  A matrix is defective iff some block size exceeds 1.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape[0] > JORDAN_DIM_CAP:
        raise NumericalError(
            f"jordan_structure limited to dim <= {JORDAN_DIM_CAP}, got {a.shape[0]}"
        )
    blocks, warns = _jordan_blocks(a, cluster_tol=cluster_tol)
    merged = {}
    for lam, size in blocks:
        key = complex(lam)
        merged.setdefault(key, []).append(size)
    out = [(lam, sorted(sizes, reverse=True)) for lam, sizes in merged.items()]
    out.sort(key=lambda b: (-b[0].real, b[0].imag))
    return out, warns


def is_defective(a, cluster_tol: float | None = None) -> bool:
    clusters, _ = jordan_structure(a, cluster_tol=cluster_tol)
    return any(any(s > 1 for s in sizes) for _, sizes in clusters)
