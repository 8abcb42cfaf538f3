"""Masked discrete flow for sequences and the iterative sequence decoder.

Tokens are integers: 0..19 index :data:`AMINO_ACIDS`, 20 is MASK.  Logits
are ``(N, 21)`` arrays whose last column belongs to the mask class; that
column never takes part in sampling, argmax or normalisation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax

from .errors import InvalidArgumentError, ShapeError

AMINO_ACIDS = "ARNDCQEGHILKMFPSTWYV"
NUM_AA = 20
MASK = 20
VOCAB_SIZE = 21

_AA_INDEX = {a: i for i, a in enumerate(AMINO_ACIDS)}


def encode(seq: str) -> np.ndarray:
    """One-letter string to tokens; ``-`` or ``X`` become MASK."""
    out = np.empty(len(seq), dtype=np.int64)
    for i, ch in enumerate(seq.upper()):
        if ch in "-X":
            out[i] = MASK
        elif ch in _AA_INDEX:
            out[i] = _AA_INDEX[ch]
        else:
            raise InvalidArgumentError(f"unknown residue letter {ch!r}")
    return out


def decode(tokens) -> str:
    return "".join("-" if t == MASK else AMINO_ACIDS[t] for t in np.asarray(tokens))


def check_sequence(s):
    s = np.asarray(s)
    if s.ndim != 1 or not np.issubdtype(s.dtype, np.integer):
        raise InvalidArgumentError("sequence must be a 1-d integer array")
    if np.any((s < 0) | (s > MASK)):
        raise InvalidArgumentError("token outside vocabulary")
    return s


@dataclass(frozen=True)
class DecodeConfig:
    T_max: float = 30.0
    lam: float = 30.0
    argmax_threshold: float = 0.85
    blend_threshold: float = 0.8
    blend_weights: tuple[float, float] = (0.8, 0.2)

    def __post_init__(self):
        if not self.T_max > 0:
            raise InvalidArgumentError("T_max must be positive")
        if self.lam < 0:
            raise InvalidArgumentError("lambda must be non-negative")
        for name in ("argmax_threshold", "blend_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1]")
        w = tuple(float(x) for x in self.blend_weights)
        if len(w) != 2 or abs(sum(w) - 1.0) > 1e-12:
            raise InvalidArgumentError("blend weights must be a pair summing to 1")
        object.__setattr__(self, "blend_weights", w)


def one_hot_logits(s, margin=20.0):
    """Logits peaked at ``s`` by ``margin``; the mask column sits at -margin."""
    s = check_sequence(s)
    out = np.zeros((len(s), VOCAB_SIZE))
    out[:, MASK] = -margin
    keep = s != MASK
    out[np.nonzero(keep)[0], s[keep]] = margin
    return out


def aa_log_probs(logits):
    """Log-softmax over the 20 amino-acid columns."""
    logits = np.asarray(logits, dtype=float)
    return log_softmax(logits[..., :NUM_AA], axis=-1)


def corrupt_sequence(s1, t, rng):
    """Keep each token with probability ``t``, otherwise replace with MASK."""
    s1 = check_sequence(s1)
    if np.any(s1 == MASK):
        raise InvalidArgumentError("corrupt_sequence expects an unmasked sequence")
    if not 0.0 <= t <= 1.0:
        raise InvalidArgumentError("t must lie in [0, 1]")
    keep = rng.random(len(s1)) < t
    return np.where(keep, s1, MASK)


def blend_logits(seqbb, refine, t_s, cfg=DecodeConfig()):
    seqbb = np.asarray(seqbb, dtype=float)
    refine = np.asarray(refine, dtype=float)
    if seqbb.shape != refine.shape:
        raise ShapeError(f"logit shapes differ: {seqbb.shape} vs {refine.shape}")
    if t_s < cfg.blend_threshold:
        return seqbb
    w0, w1 = cfg.blend_weights
    return w0 * seqbb + w1 * refine


def temperature(t_s, cfg=DecodeConfig()):
    return cfg.T_max * np.exp(-cfg.lam * t_s)


def sample_tokens(logits, t_s, cfg, rng):
    """Temperature-annealed categorical draw, or argmax once ``t_s`` is late.

    ``np.argmax`` returns the first maximum, which gives the lowest-index
    tie-break.
    """
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise InvalidArgumentError("logits must be finite")
    aa = logits[:, :NUM_AA]
    if t_s >= cfg.argmax_threshold:
        return np.argmax(aa, axis=-1).astype(np.int64)
    logp = log_softmax(aa / temperature(t_s, cfg), axis=-1)
    # Inverse-CDF draw, one uniform per row.
    cdf = np.cumsum(np.exp(logp), axis=-1)
    u = rng.random(len(aa))[:, None] * cdf[:, -1:]
    idx = (cdf <= u).sum(axis=-1)
    return np.minimum(idx, NUM_AA - 1).astype(np.int64)


def gumbel_noise(rng, n, eps=1e-8):
    u = np.clip(rng.random(n), eps, 1.0 - eps)
    return -np.log(-np.log(u))


def score_positions(logits, chosen, t_s, rng):
    """Log-probability of the chosen token plus ``(1 - t_s)``-weighted Gumbel noise."""
    chosen = check_sequence(chosen)
    if np.any(chosen == MASK):
        raise InvalidArgumentError("cannot score MASK tokens")
    logp = aa_log_probs(logits)[np.arange(len(chosen)), chosen]
    g = gumbel_noise(rng, len(chosen))
    return logp + (1.0 - t_s) * g


def num_kept(t_next, n):
    return int(np.floor(t_next * n + 1e-9)) if t_next < 1.0 else n


def remask_topk(chosen, scores, t_next):
    """Keep the ``floor(t_next * N)`` best-scoring tokens and mask the rest.

    Ties between equal scores keep the lower index.
    """
    chosen = check_sequence(chosen)
    scores = np.asarray(scores, dtype=float)
    if scores.shape != chosen.shape:
        raise ShapeError("scores and tokens differ in length")
    n = len(chosen)
    k = num_kept(t_next, n)
    order = np.lexsort((np.arange(n), -scores))
    out = np.full(n, MASK, dtype=np.int64)
    keep = order[:k]
    out[keep] = chosen[keep]
    return out


def decode_step(logits, t_s, t_next, cfg, rng):
    """One full round: sample, score, remask.  Returns (tokens, next_state)."""
    tokens = sample_tokens(logits, t_s, cfg, rng)
    scores = score_positions(logits, tokens, t_s, rng)
    return tokens, remask_topk(tokens, scores, t_next)
