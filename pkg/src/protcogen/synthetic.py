"""Synthetic proteins for tests, demos and oracle targets.

Chains are ideal-ish helices laid side by side along x so that neighbouring
chains form an interface.  Geometry is not meant to be physical beyond
having sensible CA spacing and well-defined frames.
"""
from __future__ import annotations

import numpy as np

from .allatom import CHI_MASK, TorsionSet
from .geom3 import random_rotation, so3_exp
from .flowmatch import FrameSet
from .proteinio.complex import build_complex

HELIX_RADIUS = 2.3
HELIX_RISE = 1.5
HELIX_TWIST = np.radians(100.0)


def helix_frames(n, rng, origin=(0.0, 0.0, 0.0), jitter=0.3):
    k = np.arange(n)
    ca = np.stack(
        [HELIX_RADIUS * np.cos(k * HELIX_TWIST), HELIX_RADIUS * np.sin(k * HELIX_TWIST), HELIX_RISE * k], -1
    )
    ca = ca - ca.mean(axis=0) + np.asarray(origin, dtype=float)
    # A smoothly varying orientation plus per-residue jitter keeps frames distinct.
    base = so3_exp(np.outer(k, [0.0, 0.0, HELIX_TWIST]))
    rot = base @ so3_exp(jitter * rng.standard_normal((n, 3)))
    return FrameSet(rot, ca)


def random_sequence(n, rng):
    return rng.integers(0, 20, n)


def random_torsions(seq, rng):
    seq = np.asarray(seq)
    mask = CHI_MASK[seq]
    return TorsionSet(np.where(mask, rng.uniform(0, 2 * np.pi, (len(seq), 4)), 0.0), mask)


def random_complex(lengths, rng, spacing=10.0, random_orientation=False, **meta):
    """Side-by-side helical chains with random sequences and chis."""
    rots, trans = [], []
    for k, n in enumerate(lengths):
        f = helix_frames(n, rng, origin=(spacing * k, 0.0, 0.0))
        rots.append(f.rot)
        trans.append(f.trans)
    frames = FrameSet(np.concatenate(rots), np.concatenate(trans))
    if random_orientation:
        R = random_rotation(rng)
        frames = FrameSet(R @ frames.rot, frames.trans @ R.T)
    seq = random_sequence(sum(lengths), rng)
    return build_complex(seq, frames, random_torsions(seq, rng), lengths, **meta)
