"""Summaries of coupling matrices and of raw activity.

Every statistic on a coupling matrix ignores its diagonal: the self terms
produced by the inference formulas are not interactions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

from .errors import UndefinedSimilarityError, ValidationError
from .ingest import VolumeGrid


def off_diagonal(j: np.ndarray) -> np.ndarray:
    """Off-diagonal entries in row-major order."""
    j = np.asarray(j, dtype=float)
    if j.ndim != 2 or j.shape[0] != j.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {j.shape}")
    return j[~np.eye(j.shape[0], dtype=bool)]


def mean_abs_coupling(j: np.ndarray) -> float:
    """Average of ``|J_ij|`` over ordered pairs ``i != j``."""
    if np.shape(j)[0] < 2:
        raise ValidationError("need at least two stocks")
    return float(np.abs(off_diagonal(j)).mean())


def similarity_q(j: np.ndarray, j2: np.ndarray) -> float:
    """Similarity of two coupling matrices, in [-1, 1].

    ``Q = sum J_ij J'_ij / sum max(|J_ij|, |J'_ij|)^2`` over ``i != j``.
    Equal matrices give 1 and opposite ones -1.
    """
    if np.shape(j) != np.shape(j2):
        raise ValidationError(f"shape mismatch {np.shape(j)} vs {np.shape(j2)}")
    a, b = off_diagonal(j), off_diagonal(j2)
    top = np.maximum(np.abs(a), np.abs(b))
    # identical reductions in numerator and denominator make Q(J, +/-J) exact
    denom = np.sum(top * top)
    if denom == 0:
        raise UndefinedSimilarityError("both matrices vanish off the diagonal")
    return float(np.sum(a * b) / denom)


def random_similarity_baseline(n: int, sigma: float, seeds, rng_seed: int | None = None) -> list[float]:
    """Q between pairs of independent N(0, sigma^2) matrices.

    ``seeds`` is either a count or an iterable of integer seeds; one pair of
    matrices is drawn per seed.
    """
    if n < 2:
        raise ValidationError("n must be >= 2")
    if sigma <= 0:
        raise ValidationError("sigma must be > 0")
    if isinstance(seeds, (int, np.integer)):
        ss = np.random.SeedSequence(rng_seed)
        seeds = ss.spawn(int(seeds))
    out = []
    for s in seeds:
        rng = np.random.default_rng(s)
        a = rng.normal(0.0, sigma, size=(n, n))
        b = rng.normal(0.0, sigma, size=(n, n))
        out.append(similarity_q(a, b))
    return out


def _offdiag_mean(j):
    return float(off_diagonal(j).mean())


def rescale_to_mean(j: np.ndarray, target_mean: float) -> np.ndarray:
    """``c * J`` whose off-diagonal mean equals ``target_mean``."""
    mu = _offdiag_mean(j)
    if mu == 0:
        raise ValidationError("off-diagonal mean is zero; cannot rescale to a mean")
    return (target_mean / mu) * np.asarray(j, dtype=float)


def rescale_to_std(j: np.ndarray, target_std: float) -> np.ndarray:
    """``c * J`` whose off-diagonal standard deviation equals ``target_std``."""
    sd = float(off_diagonal(j).std())
    if sd == 0:
        raise ValidationError("off-diagonal standard deviation is zero")
    return (target_std / sd) * np.asarray(j, dtype=float)


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    std: float
    skewness: float

    def to_dict(self):
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(),
                "mean": self.mean, "std": self.std, "skewness": self.skewness}


def coupling_histogram(j: np.ndarray, bins=50) -> Histogram:
    """Histogram of off-diagonal couplings with mean, std and skewness.

    Values outside explicit ``bins`` edges are not counted.
    """
    if np.ndim(bins) == 0 and int(bins) < 1:
        raise ValidationError("bins must be >= 1")
    vals = off_diagonal(j)
    counts, edges = np.histogram(vals, bins=bins)
    sd = float(vals.std())
    skew = float(_sps.skew(vals)) if sd > 0 else 0.0
    return Histogram(edges, counts, float(vals.mean()), sd, skew)


@dataclass
class SpectralSummary:
    eigenvalues: np.ndarray
    leading_vector: np.ndarray
    sign_uniformity: float

    @property
    def leading_ratio(self) -> float:
        """Largest eigenvalue over the second largest (inf when the latter is <= 0)."""
        if len(self.eigenvalues) < 2 or self.eigenvalues[1] <= 0:
            return float("inf")
        return float(self.eigenvalues[0] / self.eigenvalues[1])


def symmetrize(j: np.ndarray) -> np.ndarray:
    """``(J + J^T) / 2`` with the diagonal set to zero."""
    j = np.asarray(j, dtype=float)
    s = 0.5 * (j + j.T)
    np.fill_diagonal(s, 0.0)
    return s


def spectral_summary(j: np.ndarray) -> SpectralSummary:
    """Eigenvalues (descending) and leading eigenvector of the symmetrized matrix.

    The leading vector is oriented so that most components are positive;
    ``sign_uniformity`` is the fraction sharing that majority sign (zeros
    count against it). Values near 1 indicate a market mode.
    """
    s = symmetrize(j)
    w, v = np.linalg.eigh(s)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    lead = v[:, 0].copy()
    pos, neg = np.sum(lead > 0), np.sum(lead < 0)
    if neg > pos or (neg == pos and lead.sum() < 0):
        lead = -lead
        pos, neg = neg, pos
    return SpectralSummary(w, lead, float(max(pos, neg) / len(lead)) if len(lead) else 0.0)


def periodogram(grid: VolumeGrid, stock: int | None = None):
    """Power spectrum of the concatenated per-second volume series.

    Parameters
    ----------
    stock : int, optional
        Stock index; the sum over all stocks when None.

    Returns
    -------
    freq : ndarray
        Frequencies in cycles per second.
    power : ndarray
        ``|FFT|^2 / L`` of the mean-removed series.
    """
    if stock is None:
        series = grid.volumes.sum(axis=0, dtype=np.int64).ravel()
    else:
        series = grid.volumes[stock].ravel()
    return power_spectrum(series)


def power_spectrum(series: np.ndarray):
    """Mean-removed ``|FFT|^2 / L`` of a series sampled once per second."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    spec = np.fft.rfft(x)
    power = (spec.real**2 + spec.imag**2) / len(x)
    return np.fft.rfftfreq(len(x), d=1.0), power


def is_local_max(power: np.ndarray, k: int) -> bool:
    """True when ``power[k]`` is at least as large as both neighbours."""
    left = power[k - 1] if k > 0 else -np.inf
    right = power[k + 1] if k + 1 < len(power) else -np.inf
    return bool(power[k] >= left and power[k] >= right)


def summarize(j: np.ndarray, bins=50, reference_std: float | None = None) -> dict:
    """Content of ``summary.json`` for one coupling matrix.

    ``rescale_factor`` is the factor mapping the off-diagonal std onto
    ``reference_std`` (the equilibrium std at the same point), when given.
    """
    hist = coupling_histogram(j, bins)
    spec = spectral_summary(j)
    factor = None
    if reference_std is not None and hist.std > 0:
        factor = reference_std / hist.std
    return {
        "n": int(np.shape(j)[0]),
        "mean_abs": mean_abs_coupling(j),
        "mean": hist.mean,
        "std": hist.std,
        "skewness": hist.skewness,
        "histogram": {"edges": hist.edges.tolist(), "counts": hist.counts.tolist()},
        "rescale_factor": factor,
        "top_eigenvalues": spec.eigenvalues[:5].tolist(),
        "sign_uniformity": spec.sign_uniformity,
    }


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=1)
