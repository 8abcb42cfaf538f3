"""Structure and sequence metrics: Kabsch RMSD, recovery, chi histograms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allatom import TorsionSet
from .errors import DegenerateGeometryError, InvalidArgumentError, ShapeError
from .geom3 import RigidTransform
from .seqflow import AMINO_ACIDS, MASK, check_sequence


def kabsch(a, b):
    """Rigid transform ``T`` minimising ``sum |T(a_i) - b_i|^2`` and the resulting RMSD."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"point sets differ in shape: {a.shape} vs {b.shape}")
    if a.ndim != 2 or a.shape[1] != 3 or len(a) < 3:
        raise InvalidArgumentError("kabsch needs two (N, 3) arrays with N >= 3")
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    a0, b0 = a - ca, b - cb
    if np.linalg.matrix_rank(a0, tol=1e-8 * max(1.0, np.abs(a0).max())) < 2:
        raise DegenerateGeometryError("point set is collinear or coincident")
    h = a0.T @ b0
    u, s, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    d = 1.0 if d == 0 else d
    fix = np.diag([1.0, 1.0, d])
    rot = vt.T @ fix @ u.T
    T = RigidTransform(rot, cb - rot @ ca)
    diff = a0 @ rot.T - b0
    rmsd = float(np.sqrt(max(np.mean(np.sum(diff * diff, axis=-1)), 0.0)))
    return rmsd, T


def kabsch_rmsd(a, b):
    return kabsch(a, b)[0]


def aar(pred, truth):
    """Fraction of positions where two sequences agree."""
    pred = check_sequence(pred)
    truth = check_sequence(truth)
    if len(pred) != len(truth):
        raise ShapeError("sequences differ in length")
    if np.any(pred == MASK) or np.any(truth == MASK):
        raise InvalidArgumentError("aar is undefined on masked sequences")
    if len(pred) == 0:
        return 1.0
    return float(np.mean(pred == truth))


@dataclass
class ChiHistogram:
    """Counts of chi angles per amino acid and chi index over equal-width bins."""

    counts: np.ndarray  # (20, 4, bins) int

    @property
    def bins(self):
        return self.counts.shape[-1]

    @property
    def edges(self):
        return np.linspace(0.0, 2 * np.pi, self.bins + 1)

    def total(self):
        return int(self.counts.sum())

    def merge(self, other):
        if other.counts.shape != self.counts.shape:
            raise ShapeError("histograms use different binning")
        return ChiHistogram(self.counts + other.counts)

    def to_text(self, delimiter="\t"):
        """Rows ``aa, chi index (1-based), bin left edge (rad), count``, non-empty bins only."""
        lines = [delimiter.join(("aa", "chi", "bin_left", "count"))]
        edges = self.edges
        for a, k, b in zip(*np.nonzero(self.counts)):
            lines.append(delimiter.join((AMINO_ACIDS[a], str(k + 1), f"{edges[b]:.6f}", str(self.counts[a, k, b]))))
        return "\n".join(lines) + "\n"


def empty_histogram(bins=72):
    if bins < 2:
        raise InvalidArgumentError("need at least two bins")
    return ChiHistogram(np.zeros((20, 4, bins), dtype=np.int64))


def accumulate(hist: ChiHistogram, seq, torsions: TorsionSet):
    seq = np.asarray(seq)
    idx = np.floor(np.mod(torsions.angles, 2 * np.pi) / (2 * np.pi) * hist.bins).astype(int)
    idx = np.minimum(idx, hist.bins - 1)
    r, k = np.nonzero(torsions.mask)
    np.add.at(hist.counts, (seq[r], k, idx[r, k]), 1)
    return hist


def chi_histograms(dataset, bins=72):
    """Histogram every defined chi angle over a list of Complexes."""
    hist = empty_histogram(bins)
    for c in dataset:
        for ch in c.chains:
            accumulate(hist, ch.seq, ch.torsions)
    return hist
