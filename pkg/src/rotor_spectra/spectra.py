"""Fourier-block matrices and their labelled complex eigenspectra.

The transfer operator acts on circular Fourier mode k through the N x N
matrix D_{k,alpha} W_eps, with D_{k,alpha} = Diag(exp(-2 pi i k alpha_j)).
Eigenvalues are matched to their zero-noise targets exp(-2 pi i k alpha_ell)
by minimum-cost assignment and validated against the Gershgorin radius.
Uniform fibre noise of radius delta only rescales mode-k eigenvalues by
sin(2 pi k delta) / (2 pi k delta); eigenvectors are unaffected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousLabelling, NoConvergence
from .model import BandModel, NoiseGenerator, _freeze, w_epsilon

#: relative eigensolver residual accepted by default
DEFAULT_RESIDUAL_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class FourierBlock:
    """The matrix D_{k,alpha} W_eps for one Fourier index k."""

    k: int
    eps: float
    matrix: np.ndarray
    model: BandModel
    gen: NoiseGenerator


@dataclass(frozen=True, eq=False)
class EigResult:
    """Raw eigenpairs with per-pair residuals ||A v - lambda v||."""

    values: np.ndarray
    vectors: np.ndarray          # column i pairs with values[i], unit norm
    residuals: np.ndarray
    converged: np.ndarray        # residual <= tol * ||A||


@dataclass(frozen=True, eq=False)
class LabelledSpectrum:
    """Eigenpairs ordered by label ell: lam[ell] -> target[ell] as eps -> 0.

    Within each band, members are ordered by descending |lam|.  Vectors are
    unit norm with the largest-magnitude entry made real positive.  When a
    delta factor was applied, ``sinc`` records it and both ``lam`` and
    ``target`` carry the scaling.
    """

    k: int
    eps: float
    delta: float
    sinc: float
    lam: np.ndarray
    target: np.ndarray
    vectors: np.ndarray          # column ell
    residual: np.ndarray
    band: np.ndarray
    gersh_radius: float


def assemble_fourier_block(model: BandModel, gen: NoiseGenerator, k: int, eps: float) -> FourierBlock:
    """Build D_{k,alpha} (Id + eps*Wdot)."""
    w = w_epsilon(gen, eps)
    phases = np.exp(-2j * np.pi * k * model.alpha)
    return FourierBlock(k=int(k), eps=float(eps), matrix=_freeze(phases[:, None] * w),
                        model=model, gen=gen)


def eig_dense_complex(matrix: np.ndarray, tol: float = DEFAULT_RESIDUAL_TOL) -> EigResult:
    """Dense non-Hermitian eigendecomposition with residual certificates.

    Delegates to the platform solver (LAPACK via numpy); the contract is only
    the relative residual bound ``tol``.  Raises NoConvergence if the QR
    iteration fails outright.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    residuals = np.linalg.norm(a @ vectors - values[None, :] * vectors, axis=0)
    scale = np.linalg.norm(a, 2)
    converged = residuals <= tol * max(scale, 1e-300)
    return EigResult(values=values, vectors=_freeze(vectors),
                     residuals=_freeze(residuals), converged=_freeze(converged))


def _phase_fix(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real positive."""
    out = vectors.copy()
    for i in range(out.shape[1]):
        j = int(np.argmax(np.abs(out[:, i])))
        p = out[j, i]
        if p != 0:
            out[:, i] *= np.abs(p) / p
    return out


def gershgorin_bound(gen: NoiseGenerator, eps: float) -> float:
    """Radius 2 * max_j |Wdot_jj| * eps of the eigenvalue inclusion disks."""
    return 2.0 * float(np.max(np.abs(np.diag(gen.wdot)))) * float(eps)


def label_spectrum(block: FourierBlock, eig: EigResult,
                   tol: float = DEFAULT_RESIDUAL_TOL) -> LabelledSpectrum:
    """Match raw eigenpairs to their zero-noise targets.

    Minimum-cost bijective assignment under |lam - target|, then band-internal
    reordering by descending |lam|.  When the per-band Gershgorin disks are
    pairwise disjoint the assignment is validated against the disk radius;
    AmbiguousLabelling signals eps too large for the asymptotic labelling.
    """
    model = block.model
    if not np.all(eig.converged):
        raise NoConvergence(
            f"{int(np.sum(~eig.converged))} eigenpairs exceed the residual tolerance",
            partial=eig)
    targets = np.exp(-2j * np.pi * block.k * model.alpha)
    cost = np.abs(eig.values[:, None] - targets[None, :])
    rows, cols = linear_sum_assignment(cost)
    order = rows[np.argsort(cols)]          # eigenpair index assigned to label ell
    lam = eig.values[order]
    vec = eig.vectors[:, order]
    res = eig.residuals[order]

    # reorder within each band by descending |lam|
    for s in range(model.S):
        sl = model.band_slice(s)
        sub = np.argsort(-np.abs(lam[sl]), kind="stable")
        lam[sl], res[sl] = lam[sl][sub], res[sl][sub]
        vec[:, sl] = vec[:, sl][:, sub]

    radius = gershgorin_bound(block.gen, block.eps)
    band_targets = np.exp(-2j * np.pi * block.k * np.asarray(model.beta))
    disjoint = True
    for s1 in range(model.S):
        for s2 in range(s1 + 1, model.S):
            if np.abs(band_targets[s1] - band_targets[s2]) <= 2 * radius:
                disjoint = False
    worst = float(np.max(np.abs(lam - targets)))
    if disjoint and worst > radius * (1 + 1e-8) + 1e-13:
        raise AmbiguousLabelling(
            f"assignment cost {worst:.3e} exceeds Gershgorin radius {radius:.3e} "
            f"at k={block.k}, eps={block.eps}")

    return LabelledSpectrum(
        k=block.k, eps=block.eps, delta=0.0, sinc=1.0,
        lam=_freeze(lam), target=_freeze(targets), vectors=_freeze(_phase_fix(vec)),
        residual=_freeze(res), band=model.band_index, gersh_radius=radius)


def delta_factor(k: int, delta: float) -> float:
    """sin(2 pi k delta) / (2 pi k delta), with the 0/0 limit defined as 1.

    Exactly zero at nonzero integer arguments 2*k*delta, where floating-point
    sin(pi*n) would leave an O(1e-16) remnant.
    """
    x = 2.0 * float(k) * float(delta)
    if x == 0.0:
        return 1.0
    if float(x).is_integer():
        return 0.0
    return math.sin(math.pi * x) / (math.pi * x)


def spectrum(model: BandModel, gen: NoiseGenerator, k: int, eps: float,
             delta: float = 0.0, tol: float = DEFAULT_RESIDUAL_TOL) -> LabelledSpectrum:
    """Labelled spectrum of one Fourier block, with the delta factor applied."""
    block = assemble_fourier_block(model, gen, k, eps)
    spec = label_spectrum(block, eig_dense_complex(block.matrix, tol), tol)
    if delta == 0.0:
        return spec
    s = delta_factor(k, delta)
    return LabelledSpectrum(
        k=spec.k, eps=spec.eps, delta=float(delta), sinc=s,
        lam=_freeze(s * spec.lam), target=_freeze(s * spec.target),
        vectors=spec.vectors, residual=spec.residual, band=spec.band,
        gersh_radius=s * spec.gersh_radius)


def full_spectrum(model: BandModel, gen: NoiseGenerator, k_list, eps: float,
                  delta: float = 0.0, tol: float = DEFAULT_RESIDUAL_TOL) -> dict[int, LabelledSpectrum]:
    """Labelled spectra for several Fourier indices at one noise level."""
    return {int(k): spectrum(model, gen, int(k), eps, delta, tol) for k in k_list}
