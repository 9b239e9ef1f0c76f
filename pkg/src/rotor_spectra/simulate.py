"""Random dynamics on the discretised cylinder and Ulam cycle detection.

One step maps (j, x) to (j + gamma, x + alpha_j + eta): gamma performs the
symmetric random walk with row probabilities of W_eps (reflecting ends are
built into the stencil), and eta is uniform on [-delta, delta].  The transfer
operator is estimated on an N x M grid of cells (fibre, circle bin) either
exactly (analytic mode: bin-to-bin overlap of the translated, noise-smeared
bin, a piecewise-quadratic CDF computed in closed form) or by transition
counting from simulated paths.

Dominant nonreal eigenvalues of the cell matrix signal approximately cyclic
motion: 2 pi / |arg| estimates the period in steps (modulo the usual
sampled-rotation aliasing for speeds above half a revolution per step), and
the eigenvector mass locates the cycle's bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InsufficientData, NoComplexEigenvalues
from .model import BandModel, NoiseGenerator, _freeze, w_epsilon

#: cell count above which detect_cycles switches from dense to Arnoldi
DENSE_EIG_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    """Simulated paths: j and x have shape (n_paths, n_steps + 1).

    Reproducible: path p consumes only its own counter-based stream keyed by
    (seed, p), so results do not depend on scheduling or batch splits.
    """

    seed: int
    n_paths: int
    n_steps: int
    j: np.ndarray
    x: np.ndarray
    eps: float
    delta: float
    model: BandModel


@dataclass(frozen=True, eq=False)
class UlamOperator:
    """Row-stochastic cell transition matrix on N*M cells, fibre-major."""

    M: int
    matrix: sp.csr_matrix
    mode: str                    # "analytic" | "empirical"
    model: BandModel
    flagged_rows: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Cycle:
    """One detected cycle (a conjugate eigenvalue pair, reported once)."""

    eigenvalue: complex
    magnitude: float
    arg: float
    period_steps: float
    band_masses: tuple[float, ...]
    band: int


@dataclass(frozen=True)
class CycleReport:
    cycles: tuple[Cycle, ...]
    M: int
    top_m: int


def simulate(model: BandModel, gen: NoiseGenerator, eps: float, delta: float,
             n_paths: int, n_steps: int, seed: int, init=None) -> TrajectoryBatch:
    """Run the random dynamics; reproducible given the seed.

    Per path the stream order is: two initial-state uniforms, the walk
    uniforms for all steps, then the noise uniforms for all steps.  ``init``
    optionally fixes the initial states as a pair of arrays (j0, x0) with
    0-based fibre indices; the stream layout does not change with it.
    """
    w = w_epsilon(gen, eps)
    cum = np.cumsum(w, axis=1)
    cum[:, -1] = 1.0 + 1e-12     # guard rounding: every uniform draw must land
    children = np.random.SeedSequence(seed).spawn(n_paths)
    u_init = np.empty((n_paths, 2))
    u_walk = np.empty((n_paths, n_steps))
    u_noise = np.empty((n_paths, n_steps))
    for p, child in enumerate(children):
        g = np.random.Generator(np.random.Philox(child))
        u_init[p] = g.random(2)
        u_walk[p] = g.random(n_steps)
        u_noise[p] = g.random(n_steps)

    j = np.empty((n_paths, n_steps + 1), dtype=np.int32)
    x = np.empty((n_paths, n_steps + 1))
    if init is None:
        j[:, 0] = np.minimum((u_init[:, 0] * model.N).astype(np.int32), model.N - 1)
        x[:, 0] = u_init[:, 1]
    else:
        j0, x0 = init
        j[:, 0] = np.broadcast_to(np.asarray(j0, dtype=np.int32), (n_paths,))
        x[:, 0] = np.broadcast_to(np.asarray(x0, dtype=float), (n_paths,))
    alpha = np.asarray(model.alpha)
    for t in range(n_steps):
        jt = j[:, t]
        x[:, t + 1] = (x[:, t] + alpha[jt] + (2.0 * u_noise[:, t] - 1.0) * delta) % 1.0
        j[:, t + 1] = np.argmax(cum[jt] > u_walk[:, t][:, None], axis=1)
    return TrajectoryBatch(seed=int(seed), n_paths=int(n_paths), n_steps=int(n_steps),
                           j=_freeze(j), x=_freeze(x), eps=float(eps),
                           delta=float(delta), model=model)


def _sum_cdf(t: np.ndarray, h: float, delta: float) -> np.ndarray:
    """CDF of U[0, h) + U[-delta, delta] (a trapezoid), in closed form."""
    t = np.asarray(t, dtype=float)
    if delta == 0.0:
        return np.clip(t / h, 0.0, 1.0)

    def ramp_integral(s):
        # antiderivative of clip(s/h, 0, 1)
        return np.where(s <= 0, 0.0, np.where(s <= h, s * s / (2 * h), s - h / 2))

    return (ramp_integral(t + delta) - ramp_integral(t - delta)) / (2 * delta)


def _fibre_kernel_row(alpha_j: float, delta: float, M: int) -> np.ndarray:
    """Landing-bin probabilities from bin 0 under rotation alpha_j and noise delta.

    Circulant generator row: starting uniformly in bin b gives the same row
    shifted by b.  Exact (piecewise-quadratic CDF differences), no quadrature.
    """
    h = 1.0 / M
    s = alpha_j % 1.0
    edges = np.arange(M + 1) * h
    lo = int(np.floor(-delta - s)) - 1
    hi = int(np.ceil(h + delta - s)) + 1
    q = np.zeros(M)
    for n in range(lo, hi + 1):
        c = _sum_cdf(n + edges - s, h, delta)
        q += np.diff(c)
    return q


def ulam_analytic(model: BandModel, gen: NoiseGenerator, eps: float, delta: float,
                  M: int) -> UlamOperator:
    """Exact cell transition matrix of the annealed dynamics."""
    if M < 2:
        raise ValueError(f"need at least 2 bins, got M={M}")
    w = w_epsilon(gen, eps)
    n = model.N
    rows, cols, data = [], [], []
    a = np.arange(M)
    for j in range(n):
        q = _fibre_kernel_row(float(model.alpha[j]), delta, M)
        supp = np.nonzero(q)[0]
        dest_bins = (a[:, None] + supp[None, :]) % M          # (M, |supp|)
        src = np.repeat(j * M + a, len(supp))
        for j2 in np.nonzero(w[j])[0]:
            rows.append(src)
            cols.append((j2 * M + dest_bins).ravel())
            data.append(np.tile(w[j, j2] * q[supp], M))
    mat = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n * M, n * M)).tocsr()
    return UlamOperator(M=int(M), matrix=mat, mode="analytic", model=model)


def ulam_empirical(batch: TrajectoryBatch, M: int,
                   max_empty_fraction: float = 0.01) -> UlamOperator:
    """Row-normalised transition counts between cells.

    Rows never visited become self-loops and are flagged; more than
    ``max_empty_fraction`` empty rows raises InsufficientData.
    """
    if batch.n_paths == 0 or batch.n_steps == 0:
        raise InsufficientData("empty trajectory batch")
    n = batch.model.N
    size = n * M
    bins = np.minimum((batch.x * M).astype(np.int64), M - 1)
    cells = batch.j.astype(np.int64) * M + bins
    src = cells[:, :-1].ravel()
    dst = cells[:, 1:].ravel()
    counts = sp.coo_matrix((np.ones(src.size), (src, dst)), shape=(size, size)).tocsr()
    row_tot = np.asarray(counts.sum(axis=1)).ravel()
    empty = np.nonzero(row_tot == 0)[0]
    if len(empty) > max_empty_fraction * size:
        raise InsufficientData(
            f"{len(empty)} of {size} rows have no transitions "
            f"(limit {max_empty_fraction:.0%})")
    inv = np.ones(size)
    inv[row_tot > 0] = 1.0 / row_tot[row_tot > 0]
    mat = sp.diags(inv) @ counts
    if len(empty):
        mat = (mat + sp.coo_matrix(
            (np.ones(len(empty)), (empty, empty)), shape=(size, size))).tocsr()
    return UlamOperator(M=int(M), matrix=sp.csr_matrix(mat), mode="empirical",
                        model=batch.model, flagged_rows=tuple(int(r) for r in empty))


def _top_eigenpairs(op: UlamOperator, want: int):
    """Leading eigenpairs by magnitude; dense below DENSE_EIG_LIMIT, else Arnoldi."""
    size = op.size
    if size <= DENSE_EIG_LIMIT:
        values, vectors = np.linalg.eig(op.matrix.toarray())
        return values, vectors
    k = min(max(2 * want + 10, 24), size - 2)
    v0 = np.full(size, 1.0 / np.sqrt(size))     # fixed start: deterministic runs
    values, vectors = spla.eigs(op.matrix, k=k, which="LM", v0=v0)
    return values, vectors


def detect_cycles(op: UlamOperator, model: BandModel, top_m: int,
                  imag_tol: float = 1e-9) -> CycleReport:
    """Report the top_m largest-magnitude nonreal eigenvalues as cycles.

    Conjugate pairs are reported once, by their lower-half-plane member.  A
    cycle's per-band mass comes from the squared magnitudes of its eigenvector
    summed over each band's cells; the band with the largest mass is the
    attributed support.
    """
    if top_m < 1:
        raise ValueError("top_m must be >= 1")
    values, vectors = _top_eigenpairs(op, top_m)
    nonreal = np.nonzero(np.abs(values.imag) > imag_tol)[0]
    if len(nonreal) == 0:
        raise NoComplexEigenvalues("spectrum is numerically real")
    # canonical representative: lower half plane
    reps = []
    for i in nonreal:
        lam = values[i]
        rep = lam if lam.imag < 0 else np.conj(lam)
        reps.append((rep, i))
    reps.sort(key=lambda t: (-abs(t[0]), t[0].real, t[0].imag))
    picked = []
    for rep, i in reps:
        if any(abs(rep - r) <= 1e-9 * max(1.0, abs(rep)) for r, _ in picked):
            continue
        picked.append((rep, i))
        if len(picked) == top_m:
            break

    cycles = []
    for rep, i in picked:
        v = vectors[:, i]
        mass = np.abs(v) ** 2
        mass = mass / mass.sum()
        per_fibre = mass.reshape(model.N, op.M).sum(axis=1)
        band_masses = tuple(float(per_fibre[model.band_slice(s)].sum())
                            for s in range(model.S))
        arg = float(np.angle(rep))
        cycles.append(Cycle(
            eigenvalue=complex(rep), magnitude=float(abs(rep)), arg=arg,
            period_steps=float(2 * np.pi / abs(arg)),
            band_masses=band_masses, band=int(np.argmax(band_masses))))
    return CycleReport(cycles=tuple(cycles), M=op.M, top_m=int(top_m))
