"""Complex Hermitian matrix toolkit for density matrices and POVMs.

Everything works on plain complex ndarrays.  All matrix functions go through
a Hermitian eigendecomposition after explicit symmetrization, and entropies
are in nats (natural logarithm) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances used by validators and matrix repair.

    tol_herm / tol_psd / tol_trace bound the accepted Hermiticity defect,
    eigenvalue negativity and trace defect; tol_eq is the slack granted to
    inequality checks.
    """

    tol_herm: float = 1e-9
    tol_psd: float = 1e-9
    tol_trace: float = 1e-9
    tol_eq: float = 1e-7

    def __post_init__(self):
        if min(self.tol_herm, self.tol_psd, self.tol_trace, self.tol_eq) < 0:
            raise StructuralError("tolerances must be nonnegative")


DEFAULT_TOL = Tolerances()


def hermitize(mat: np.ndarray) -> np.ndarray:
    """(M + M†)/2; cheap insurance before any eigendecomposition."""
    return 0.5 * (mat + mat.conj().T)


def eigh_psd(mat: np.ndarray, tol: Tolerances = DEFAULT_TOL):
    """Eigendecomposition of a nominally-PSD Hermitian matrix.

    Eigenvalues in [-tol_psd, 0) are clipped to zero; anything more negative
    is a hard error rather than a silent repair.
    """
    vals, vecs = np.linalg.eigh(hermitize(mat))
    if vals.size and vals[0] < -tol.tol_psd * max(1.0, float(vals[-1])):
        raise StructuralError(f"matrix is not PSD: min eigenvalue {vals[0]:.3e}")
    return np.clip(vals, 0.0, None), vecs


def validate_density_matrix(mat: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Check Hermiticity/PSD/trace of a density matrix and return a repaired copy.

    Repair is limited to symmetrization, clipping eigenvalues in
    [-tol_psd, 0) and renormalizing the trace within tol_trace.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise StructuralError(f"density matrix must be square, got shape {mat.shape}")
    defect = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if defect > tol.tol_herm:
        raise StructuralError(f"matrix is not Hermitian: defect {defect:.3e}")
    vals, vecs = eigh_psd(mat, tol)
    tr = float(vals.sum())
    if abs(tr - 1.0) > tol.tol_trace:
        raise StructuralError(f"density matrix trace {tr!r} != 1")
    vals = vals / tr
    return (vecs * vals) @ vecs.conj().T


def psd_sqrt(mat: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    vals, vecs = eigh_psd(mat, tol)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def psd_inv_sqrt_support(mat: np.ndarray, tol: Tolerances = DEFAULT_TOL, rcond: float = 1e-12):
    """Inverse square root on the support of a PSD matrix.

    Returns (inv_sqrt, support_projector); eigenvalues below ``rcond`` times
    the largest are treated as kernel.
    """
    vals, vecs = eigh_psd(mat, tol)
    top = float(vals[-1]) if vals.size else 0.0
    if top <= 0.0:
        raise StructuralError("matrix has empty support")
    keep = vals > rcond * top
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / np.sqrt(vals[keep])
    inv_sqrt = (vecs * inv) @ vecs.conj().T
    proj = (vecs * keep.astype(float)) @ vecs.conj().T
    return inv_sqrt, proj


def _check_same_dim(rho: np.ndarray, sigma: np.ndarray) -> None:
    if rho.shape != sigma.shape:
        raise StructuralError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")


def fidelity(rho: np.ndarray, sigma: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), clipped to [0, 1].

    Evaluated as the nuclear norm of sqrt(rho) sqrt(sigma): the singular
    values come out backward-stably, unlike eigenvalues of the sandwiched
    product, whose clipping noise gets amplified by the square root.
    """
    _check_same_dim(rho, sigma)
    prod = psd_sqrt(rho, tol) @ psd_sqrt(sigma, tol)
    return float(min(1.0, np.linalg.svd(prod, compute_uv=False).sum()))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of the difference."""
    _check_same_dim(rho, sigma)
    vals = np.linalg.eigvalsh(hermitize(rho - sigma))
    return float(0.5 * np.abs(vals).sum())


def entropy_of_probs(p: np.ndarray) -> float:
    """Shannon entropy in nats with the 0*log0 := 0 convention."""
    p = np.asarray(p, dtype=float)
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def von_neumann_entropy(rho: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """-Tr(rho log rho) in nats; tiny eigenvalues are clipped to zero."""
    vals, _ = eigh_psd(rho, tol)
    return entropy_of_probs(vals)


def angle(rho: np.ndarray, sigma: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """arccos of the fidelity; a metric on density matrices."""
    return float(np.arccos(np.clip(fidelity(rho, sigma, tol), 0.0, 1.0)))


def helstrom_error(rho0: np.ndarray, rho1: np.ndarray, p0: float = 0.5) -> float:
    """Error probability of the optimal two-state discriminator."""
    _check_same_dim(rho0, rho1)
    p1 = 1.0 - p0
    vals = np.linalg.eigvalsh(hermitize(p0 * rho0 - p1 * rho1))
    return float(0.5 * (1.0 - np.abs(vals).sum()))


@dataclass
class Povm:
    """A positive operator-valued measure: PSD effects summing to the identity."""

    effects: list

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> None:
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for e in self.effects:
            vals = np.linalg.eigvalsh(hermitize(e))
            if vals[0] < -tol.tol_psd:
                raise StructuralError(f"effect not PSD: min eigenvalue {vals[0]:.3e}")
            if vals[-1] > 1.0 + tol.tol_psd:
                raise StructuralError(f"effect exceeds identity: max eigenvalue {vals[-1]:.3e}")
            total += e
        defect = np.max(np.abs(total - np.eye(self.dim)))
        if defect > max(tol.tol_trace, 1e-7):
            raise StructuralError(f"effects do not sum to the identity: defect {defect:.3e}")

    def outcome_probabilities(self, rho: np.ndarray) -> np.ndarray:
        p = np.array([float(np.real(np.trace(e @ rho))) for e in self.effects])
        return np.clip(p, 0.0, None)


def pretty_good_measurement(
    states: list, priors=None, tol: Tolerances = DEFAULT_TOL
) -> Povm:
    """The square-root measurement for an ensemble of density matrices.

    Effects are S^{-1/2} p_x rho_x S^{-1/2} with S the ensemble average; the
    inverse square root is taken on the support of S and the kernel remainder
    is distributed uniformly over the effects so they sum to the identity.
    """
    n = len(states)
    if priors is None:
        priors = np.full(n, 1.0 / n)
    priors = np.asarray(priors, dtype=float)
    if abs(priors.sum() - 1.0) > 1e-9 or np.any(priors < 0):
        raise StructuralError("priors must be a probability vector")
    dim = states[0].shape[0]
    avg = sum(p * s for p, s in zip(priors, states))
    if float(np.real(np.trace(avg))) <= 0.0:
        raise StructuralError("ensemble average state is zero")
    inv_sqrt, proj = psd_inv_sqrt_support(avg, tol)
    remainder = (np.eye(dim) - proj) / n
    effects = [hermitize(inv_sqrt @ (p * s) @ inv_sqrt) + remainder for p, s in zip(priors, states)]
    return Povm(effects)


def povm_error_probability(povm: Povm, states: list, priors=None) -> float:
    """Average misidentification probability when effect i is the guess for state i."""
    n = len(states)
    if priors is None:
        priors = np.full(n, 1.0 / n)
    success = sum(
        float(p * np.real(np.trace(e @ s))) for p, e, s in zip(priors, povm.effects, states)
    )
    return float(1.0 - min(1.0, success))


def sequential_measure(effects: list, rho: np.ndarray, tol: Tolerances = DEFAULT_TOL):
    """Apply sqrt(Pi_i) . sqrt(Pi_i) for each operator in order.

    Returns (survival probability, unnormalized post-state).  Each operator
    must satisfy 0 <= Pi <= I within tolerance.
    """
    post = np.asarray(rho, dtype=complex)
    for pi in effects:
        vals = np.linalg.eigvalsh(hermitize(pi))
        if vals[0] < -tol.tol_psd or vals[-1] > 1.0 + tol.tol_psd:
            raise StructuralError("sequential-measurement operator is not in [0, I]")
        sq = psd_sqrt(pi, tol)
        post = sq @ post @ sq
    return float(np.real(np.trace(post))), post


def union_bound_rhs(effects: list, rho: np.ndarray) -> float:
    """2 sqrt(r) sqrt(sum_i (1 - Tr(Pi_i rho))) for the sequential chain."""
    r = len(effects)
    missing = sum(max(0.0, 1.0 - float(np.real(np.trace(pi @ rho)))) for pi in effects)
    return float(2.0 * np.sqrt(r) * np.sqrt(missing))


def trace_sqrt_subadditivity_check(
    A: np.ndarray, B: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> bool:
    """True iff Tr sqrt(A+B) <= Tr sqrt(A) + Tr sqrt(B) within tol_eq."""
    tr = lambda m: float(np.sqrt(np.clip(np.linalg.eigvalsh(hermitize(m)), 0.0, None)).sum())
    return tr(A + B) <= tr(A) + tr(B) + tol.tol_eq
