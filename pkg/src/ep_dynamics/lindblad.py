"""Local Lindblad master-equation route for short chains of dissipative dots.

The chain Hamiltonian lives in the 2^n-dimensional Fock space built from
fermionic dot operators (Jordan-Wigner construction); each dot j exchanges
particles with its reservoir through jump operators ``sqrt(Gamma_j (1-f_j)) c_j``
and ``sqrt(Gamma_j f_j) c_j^dagger`` with the occupation f_j evaluated at the
dot energy.  The generator is vectorized column-stacking style, so
``vec(A X B) = (B^T kron A) vec(X)``.

For two resonant dots the closed particle-number-diagonal sector of the
generator carries the eigenvalues {0, -Gamma, -Gamma/2 (x2), -Gamma/2 +- 2 eta}
with the same eta as the single-particle route; at the exceptional point the
-Gamma/2 cluster fuses into a third-order Jordan block (one order higher than
the second-order degeneracy of the 2x2 evolution matrix).
"""

from __future__ import annotations

import numpy as np

from .linalg import (
    NumericalError,
    SpectralDecomposition,
    eigendecompose,
    expm,
    jordan_structure,
)
from .model import (
    ChainParams,
    InitialConditions,
    ValidationError,
    fermi,
    validate,
)

__all__ = [
    "dot_operators",
    "build_hamiltonian",
    "build_liouvillian",
    "liouvillian_spectrum",
    "steady_state",
    "evolve",
    "populations",
    "me_populations",
    "number_sector_matrix",
    "eta_me",
    "sector_jordan_structure",
    "physicality_report",
]

MAX_DOTS_MANY_BODY = 6  # 4^n Liouvillian entries; 6 dots is already 4096^2


def dot_operators(n_dots: int) -> list[np.ndarray]:
    """Fermionic annihilation operators c_j in the 2^n Fock basis.

    Basis state ``b`` occupies dot j iff bit ``j - 1`` of ``b`` is set.
    Jordan-Wigner phase strings keep the anticommutation relations exact.
    """
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1| : removes a particle
    sz = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for j in range(n_dots):
        factors = [sz] * j + [sm] + [eye] * (n_dots - j - 1)
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(f, op)
        ops.append(op.astype(complex))
    return ops


def build_hamiltonian(params: ChainParams) -> np.ndarray:
    """Many-body chain Hamiltonian: dot energies plus nearest-neighbour hopping."""
    if params.n_dots > MAX_DOTS_MANY_BODY:
        raise ValidationError(
            [f"many-body route limited to {MAX_DOTS_MANY_BODY} dots, "
             f"got {params.n_dots}"]
        )
    ops = dot_operators(params.n_dots)
    dim = 2 ** params.n_dots
    h = np.zeros((dim, dim), dtype=complex)
    for j, cj in enumerate(ops):
        h += params.eps[j] * (cj.conj().T @ cj)
    for j in range(params.n_dots - 1):
        hop = ops[j].conj().T @ ops[j + 1]
        h += params.g * (hop + hop.conj().T)
    return h


def _dissipator(a: np.ndarray) -> np.ndarray:
    dim = a.shape[0]
    eye = np.eye(dim)
    ada = a.conj().T @ a
    return (np.kron(a.conj(), a)
            - 0.5 * (np.kron(eye, ada) + np.kron(ada.T, eye)))


def build_liouvillian(params: ChainParams, specs) -> np.ndarray:
    """Vectorized Lindblad generator acting on column-stacked density matrices."""
    params, specs, _ = validate(params, specs, None)
    h = build_hamiltonian(params)
    dim = h.shape[0]
    eye = np.eye(dim)
    liou = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    ops = dot_operators(params.n_dots)
    for j, cj in enumerate(ops):
        gj = params.gamma[j]
        if gj == 0.0:
            continue
        fj = float(fermi(params.eps[j], specs[j]))
        liou += gj * (1.0 - fj) * _dissipator(cj)
        liou += gj * fj * _dissipator(cj.conj().T)
    return liou


def liouvillian_spectrum(params: ChainParams, specs,
                         jordan: bool = False) -> SpectralDecomposition:
    """Sorted spectrum of the generator, with structural self-checks.

    ``vec(1)`` must be an exact left null vector (trace preservation).  For
    two resonant dots the analytic set {0, -Gamma, -Gamma/2, -Gamma/2,
    -Gamma/2 +- 2 eta} must be contained in the spectrum; both checks raise
    on failure.
    """
    liou = build_liouvillian(params, specs)
    dim = int(round(np.sqrt(liou.shape[0])))
    left = np.eye(dim, dtype=complex).reshape(-1, order="F")
    defect = np.linalg.norm(left @ liou)
    scale = max(np.linalg.norm(liou, 2), np.finfo(float).tiny)
    if defect > 1e-12 * scale:
        raise NumericalError(
            f"generator is not trace-preserving: |vec(1)^T L| = {defect:.3e}"
        )
    decomp = eigendecompose(liou, jordan=jordan and liou.shape[0] <= 64)
    if params.n_dots == 2 and params.resonant:
        gamma = params.gamma_total
        e2 = (0.25 * (params.gamma[0] - params.gamma[1])) ** 2 - params.g ** 2
        eta = np.sqrt(complex(e2))
        expected = np.array([0.0, -gamma, -gamma / 2, -gamma / 2,
                             -gamma / 2 + 2 * eta, -gamma / 2 - 2 * eta])
        worst = max(
            float(np.min(np.abs(decomp.eigenvalues - e))) for e in expected
        )
        if worst > 1e-9 * scale:
            raise NumericalError(
                f"two-dot spectrum misses an analytic eigenvalue by {worst:.3e}"
            )
    return decomp


def steady_state(params: ChainParams, specs) -> np.ndarray:
    """Density matrix in the kernel of the generator, normalized to unit trace."""
    liou = build_liouvillian(params, specs)
    if params.gamma_total == 0.0:
        raise ValidationError(["no steady state: all reservoir rates are zero"])
    vals, vecs = np.linalg.eig(liou)
    idx = int(np.argmin(np.abs(vals)))
    dim = int(round(np.sqrt(liou.shape[0])))
    rho = vecs[:, idx].reshape((dim, dim), order="F")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-300:
        raise NumericalError("traceless kernel vector; no physical steady state")
    return rho / tr


TRACE_TOL = 1e-12
HERMITICITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10


def evolve(params: ChainParams, specs, rho0: np.ndarray, times,
           check: bool = True) -> np.ndarray:
    """Density matrices e^{L t} rho0 on the given times; shape (n_t, dim, dim).

    Hermiticity is restored by symmetrization (a pure round-off operation);
    trace and positivity are *not* adjusted.  With ``check`` enabled the
    evolution aborts if any snapshot violates the physicality tolerances.
    """
    liou = build_liouvillian(params, specs)
    dim = int(round(np.sqrt(liou.shape[0])))
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (dim, dim):
        raise ValidationError(
            [f"initial density matrix shape {rho0.shape}, expected {(dim, dim)}"]
        )
    t_arr = np.atleast_1d(np.asarray(times, dtype=float))
    v0 = rho0.reshape(-1, order="F")
    out = np.empty((t_arr.size, dim, dim), dtype=complex)
    for k, t in enumerate(t_arr):
        raw = (expm(liou, t) @ v0).reshape((dim, dim), order="F")
        out[k] = 0.5 * (raw + raw.conj().T)
        if check:
            herm = float(np.max(np.abs(raw - raw.conj().T)))
            trace_dev = abs(np.trace(raw) - 1.0)
            min_eig = float(np.linalg.eigvalsh(out[k]).min())
            if (herm > HERMITICITY_TOL or trace_dev > TRACE_TOL
                    or min_eig < -POSITIVITY_TOL):
                raise NumericalError(
                    f"unphysical density matrix at t = {t:g}: "
                    f"hermiticity defect {herm:.3e}, trace defect "
                    f"{trace_dev:.3e}, min eigenvalue {min_eig:.3e}"
                )
    return out


def product_state(params: ChainParams, init: InitialConditions) -> np.ndarray:
    """Diagonal product density matrix with dot occupations ``init.n``."""
    rho = np.array([[1.0]], dtype=complex)
    # dot j maps to bit j-1 of the Fock index, so later dots are the outer
    # kron factors, matching dot_operators
    for nj in init.n:
        rho = np.kron(np.diag([1.0 - nj, nj]).astype(complex), rho)
    return rho


def populations(params: ChainParams, rho: np.ndarray) -> np.ndarray:
    """Dot occupations Tr(n_j rho) for one density matrix or a stack of them."""
    ops = dot_operators(params.n_dots)
    rho = np.asarray(rho)
    single = rho.ndim == 2
    stack = rho[None] if single else rho
    out = np.empty((params.n_dots, stack.shape[0]))
    for j, cj in enumerate(ops):
        num = cj.conj().T @ cj
        out[j] = np.einsum("kij,ji->k", stack, num).real
    return out[:, 0] if single else out


def me_populations(params: ChainParams, specs, init: InitialConditions,
                   times) -> np.ndarray:
    """Populations along the master-equation route; shape (n_dots, n_t)."""
    params, specs, init = validate(params, specs, init)
    rhos = evolve(params, specs, product_state(params, init), times)
    return populations(params, rhos)


# ---------------------------------------------------------------------------
# number-diagonal sector of the two-dot generator
# ---------------------------------------------------------------------------

# outer products |a><b| spanning the closed sector, as (ket, bra) Fock indices:
# the four diagonal states plus the single-particle coherences 01 <-> 10
_SECTOR_TWO_DOTS = [(0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1)]


def number_sector_matrix(params: ChainParams, specs) -> np.ndarray:
    """The two-dot generator restricted to its closed number-diagonal sector.

    Returns the 6x6 block spanned by the diagonal Fock projectors and the
    one-particle coherences; raises if the block fails to be invariant.
    """
    if params.n_dots != 2:
        raise ValidationError(
            [f"number-diagonal sector reduction implemented for 2 dots, "
             f"got {params.n_dots}"]
        )
    liou = build_liouvillian(params, specs)
    dim = 4
    idx = np.array([a + dim * b for a, b in _SECTOR_TWO_DOTS])
    cols = liou[:, idx]
    leak = cols.copy()
    leak[idx, :] = 0.0
    scale = max(np.linalg.norm(liou, 2), np.finfo(float).tiny)
    if np.linalg.norm(leak) > 1e-12 * scale:
        raise NumericalError(
            "number-diagonal sector is not invariant under the generator"
        )
    return cols[idx, :]


def eta_me(params: ChainParams, specs) -> complex:
    """Half-splitting eta recovered from the master-equation spectrum alone.

    The sector spectrum is {0, -Gamma, -Gamma/2, -Gamma/2, -Gamma/2 +- 2 eta};
    dropping the eigenvalues nearest 0 and -Gamma (which cannot collide with
    the -Gamma/2 cluster, since |eta| < Gamma/4) leaves the quartet whose
    extremes are separated by 4 eta.
    """
    sector = number_sector_matrix(params, specs)
    vals = np.linalg.eigvals(sector)
    gamma = params.gamma_total
    keep = np.ones(6, dtype=bool)
    for target in (0.0, -gamma):
        masked = np.where(keep, np.abs(vals - target), np.inf)
        keep[int(np.argmin(masked))] = False
    quartet = vals[keep]
    # the extremes are the pair at maximal separation; a lexicographic sort
    # would misorder them when round-off perturbs the tied real parts
    besti, bestj, best = 0, 0, -1.0
    for i in range(4):
        for j in range(i + 1, 4):
            d = abs(quartet[i] - quartet[j])
            if d > best:
                besti, bestj, best = i, j, d
    e = complex(quartet[besti] - quartet[bestj]) / 4.0
    # the pair only defines eta up to sign; pick the principal-square-root
    # convention (Re > 0, or Im > 0 when the real part is round-off noise)
    noise = 1e-9 * max(gamma, 1e-300)
    if e.real < -noise or (abs(e.real) <= noise and e.imag < 0.0):
        e = -e
    return e


def sector_jordan_structure(params: ChainParams, specs,
                            cluster_tol: float | None = None):
    """Jordan blocks of the number-diagonal sector matrix (EP diagnostics)."""
    sector = number_sector_matrix(params, specs)
    return jordan_structure(sector, cluster_tol=cluster_tol)


def physicality_report(rho: np.ndarray) -> dict:
    """Trace, Hermiticity and positivity defects of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    sym = 0.5 * (rho + rho.conj().T)
    eigs = np.linalg.eigvalsh(sym)
    return {
        "trace_deviation": abs(np.trace(rho) - 1.0),
        "hermiticity_deviation": herm,
        "min_eigenvalue": float(eigs.min()),
        "max_eigenvalue": float(eigs.max()),
    }
