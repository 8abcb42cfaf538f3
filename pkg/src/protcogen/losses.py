"""Loss evaluators for the sequence/backbone, sidechain and refinement stages.

These are plain numpy evaluations of the objectives; nothing here computes
gradients.  Per-residue quantities are averaged over residues and summed over
vector components unless a docstring says otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ShapeError
from .geom3 import RigidTransform, mat2vec
from .seqflow import NUM_AA, VOCAB_SIZE, aa_log_probs, check_sequence

CONSISTENCY_WEIGHT = 0.3
REFINE_FAPE_WEIGHT = 0.25
REFINE_DIST_WEIGHT = 0.25


@dataclass(frozen=True)
class ConsistencyConfig:
    coefficient: float = 0.00054
    dim_s: int | None = None  # defaults to N * 21
    dim_t: int | None = None  # defaults to N * 12
    delta_t: float = 0.01
    weight: float = CONSISTENCY_WEIGHT

    def __post_init__(self):
        for name in ("dim_s", "dim_t"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise InvalidArgumentError(f"{name} must be >= 1")
        if not 0.0 < self.delta_t < 1.0:
            raise InvalidArgumentError("delta_t must lie in (0, 1)")

    def c_s(self, n):
        return self.coefficient * np.sqrt(self.dim_s if self.dim_s is not None else n * VOCAB_SIZE)

    def c_t(self, n):
        return self.coefficient * np.sqrt(self.dim_t if self.dim_t is not None else n * 12)


@dataclass(frozen=True)
class FapeConfig:
    clamp: float = 10.0
    length_scale: float = 10.0
    backbone_only: bool = False

    def __post_init__(self):
        if not (self.clamp > 0 and self.length_scale > 0):
            raise InvalidArgumentError("FAPE clamp and length scale must be positive")


def _same_len(*arrays):
    n = {len(a) for a in arrays}
    if len(n) != 1:
        raise ShapeError(f"length mismatch: {[len(a) for a in arrays]}")


def loss_se3_fm(pred_vf_trans, true_vf_trans, pred_vf_rot, true_vf_rot):
    """Translation plus rotation vector-field regression error."""
    arrs = [np.asarray(a, dtype=float) for a in (pred_vf_trans, true_vf_trans, pred_vf_rot, true_vf_rot)]
    _same_len(*arrs)
    pt, tt, pr, tr = arrs
    l_trans = np.mean(np.sum((pt - tt) ** 2, axis=-1))
    l_rot = np.mean(np.sum((pr - tr) ** 2, axis=-1))
    return float(l_trans + l_rot)


def cross_entropy(logits, s1, positions=None):
    """Mean negative log-likelihood of ``s1`` under the amino-acid softmax."""
    s1 = check_sequence(s1)
    logits = np.asarray(logits, dtype=float)
    if logits.shape != (len(s1), VOCAB_SIZE):
        raise ShapeError(f"logits {logits.shape} do not match sequence length {len(s1)}")
    idx = np.arange(len(s1)) if positions is None else np.asarray(positions)
    if idx.dtype == bool:
        idx = np.nonzero(idx)[0]
    if len(idx) == 0:
        return 0.0
    if np.any(s1[idx] >= NUM_AA):
        raise InvalidArgumentError("scored positions must hold amino acids, not MASK")
    logp = aa_log_probs(logits[idx])
    return float(-np.mean(logp[np.arange(len(idx)), s1[idx]]))


def loss_discrete(logits, s1, positions=None):
    return cross_entropy(logits, s1, positions)


def _pseudo_huber(x, c):
    return np.sqrt(x * x + c * c) - c


def sequence_kl(student_logits, teacher_logits):
    """Mean over positions of KL(teacher || student) on the amino-acid softmax."""
    lp_s = aa_log_probs(student_logits)
    lp_t = aa_log_probs(teacher_logits)
    return float(np.mean(np.sum(np.exp(lp_t) * (lp_t - lp_s), axis=-1)))


def structure_mse(frames_a: RigidTransform, frames_b: RigidTransform):
    dt = np.sum((frames_a.trans - frames_b.trans) ** 2, axis=-1)
    dr = np.sum((mat2vec(frames_a.rot) - mat2vec(frames_b.rot)) ** 2, axis=-1)
    return float(np.mean(dt) + np.mean(dr))


def loss_consistency(pred_a, pred_b, t_s, t_t, cfg=ConsistencyConfig()):
    """Pseudo-Huber gap between a prediction and its adjacent-time teacher.

    ``pred_b`` is the prediction made at ``t + delta_t`` and only ever acts
    as a constant target.
    """
    la, lb = np.asarray(pred_a.logits, dtype=float), np.asarray(pred_b.logits, dtype=float)
    if la.shape != lb.shape or pred_a.frames.shape != pred_b.frames.shape:
        raise ShapeError("consistency predictions differ in shape")
    n = len(la)
    kl = sequence_kl(la, lb)
    mse = structure_mse(pred_a.frames, pred_b.frames)
    return float(t_s**2 * _pseudo_huber(kl, cfg.c_s(n)) + t_t**2 * _pseudo_huber(mse, cfg.c_t(n)))


def loss_fape(pred_frames, pred_atoms, true_frames, true_atoms, cfg=FapeConfig()):
    """Clamped frame-aligned point error averaged over every (frame, atom) pair."""
    pred_atoms = np.asarray(pred_atoms, dtype=float)
    true_atoms = np.asarray(true_atoms, dtype=float)
    if len(pred_frames) != len(true_frames) or pred_atoms.shape != true_atoms.shape:
        raise ShapeError("FAPE frame or atom counts differ")
    # local[i, j] = frame_i^-1(atom_j)
    lp = np.einsum("iba,ijb->ija", pred_frames.rot, pred_atoms[None] - pred_frames.trans[:, None])
    lt = np.einsum("iba,ijb->ija", true_frames.rot, true_atoms[None] - true_frames.trans[:, None])
    d = np.linalg.norm(lp - lt, axis=-1)
    return float(np.mean(np.minimum(d, cfg.clamp)) / cfg.length_scale)


def backbone_atoms(frames: RigidTransform):
    """Idealised N, CA, C positions implied by each residue frame, shape (3N, 3)."""
    from .allatom import TEMPLATES

    bb = TEMPLATES["G"].backbone
    local = np.stack([bb["N"], bb["CA"], bb["C"]])
    atoms = np.einsum("nij,kj->nki", frames.rot, local) + frames.trans[:, None]
    return atoms.reshape(-1, 3)


def loss_fape_backbone(pred_frames, true_frames, cfg=FapeConfig(backbone_only=True)):
    return loss_fape(pred_frames, backbone_atoms(pred_frames), true_frames, backbone_atoms(true_frames), cfg)


def pairwise_distances(x):
    x = np.asarray(x, dtype=float)
    return np.linalg.norm(x[:, None, :] - x[None, :, :], axis=-1)


def loss_distogram(pred_coords, true_coords):
    """Mean over ordered pairs i != j of the squared distance difference."""
    pred_coords = np.asarray(pred_coords, dtype=float)
    true_coords = np.asarray(true_coords, dtype=float)
    _same_len(pred_coords, true_coords)
    n = len(pred_coords)
    if n < 2:
        raise InvalidArgumentError("distogram loss needs at least two residues")
    diff = (pairwise_distances(pred_coords) - pairwise_distances(true_coords)) ** 2
    return float(diff.sum() / (n * (n - 1)))


def loss_correction(refined_logits, refined_frames, s1, t1):
    """Sequence NLL plus translation and Frobenius rotation errors of a refined prediction."""
    if len(refined_frames) != len(t1) or len(refined_logits) != len(s1) or len(s1) != len(t1):
        raise ShapeError("correction loss inputs differ in length")
    nll = cross_entropy(refined_logits, s1)
    dx = np.mean(np.sum((refined_frames.trans - t1.trans) ** 2, axis=-1))
    dr = np.mean(np.sum((refined_frames.rot - t1.rot) ** 2, axis=(-2, -1)))
    return float(nll + dx + dr)


def loss_refine_total(corr, fape_bb, dist):
    return float(corr + REFINE_FAPE_WEIGHT * fape_bb + REFINE_DIST_WEIGHT * dist)


def loss_chi(pred_chi, true_chi, symmetry=None):
    """Mean squared chord distance between chi angles on the unit circle.

    ``pred_chi`` / ``true_chi`` are TorsionSets; ``symmetry`` is an (N, 4)
    bool array of pi-periodic flags.  For flagged chis the smaller of the
    errors against ``true`` and ``true + pi`` is used.
    """
    if pred_chi.mask.shape != true_chi.mask.shape or np.any(pred_chi.mask != true_chi.mask):
        raise ShapeError("chi validity masks differ")
    mask = true_chi.mask
    if not mask.any():
        return 0.0

    def chord2(a, b):
        return (np.sin(a) - np.sin(b)) ** 2 + (np.cos(a) - np.cos(b)) ** 2

    err = chord2(pred_chi.angles, true_chi.angles)
    if symmetry is not None:
        sym = np.asarray(symmetry, dtype=bool)
        alt = chord2(pred_chi.angles, true_chi.angles + np.pi)
        err = np.where(sym, np.minimum(err, alt), err)
    return float(err[mask].mean())


def loss_seqbb(flow_matching, consistency, weight=CONSISTENCY_WEIGHT):
    return float(flow_matching + weight * consistency)


def loss_packing(chi, fape):
    return float(chi + fape)
