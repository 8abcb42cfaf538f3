"""Staged sequence/structure sampling with pluggable denoisers.

A denoiser is any callable

    denoiser(seq, frames, t_s, t_t, role, *, torsions=None,
             chain_index=None, fixed_mask=None) -> DenoiserOutput

where ``role`` is one of ``"seqbb"``, ``"sidechain"`` or ``"refine"``.  The
sampler queries ``seqbb`` at every step; once ``t >= activation`` it also
queries ``sidechain`` and then ``refine`` on the current prediction, blends
the two sets of logits and takes the refined frames as the structure
prediction.  Residues with ``fixed_mask`` set are conditioning context: they
are passed at their clean state and never updated.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .allatom import CHI_MASK, TorsionSet
from .errors import ContractError, InvalidArgumentError
from .flowmatch import Exponential, FrameSet, Linear, euler_step, sample_prior
from .geom3 import RigidTransform, is_rotation, so3_exp
from .metrics import kabsch
from .proteinio.complex import Complex, build_chain, _chain_ids
from .seqflow import (
    AMINO_ACIDS,
    MASK,
    NUM_AA,
    VOCAB_SIZE,
    DecodeConfig,
    blend_logits,
    one_hot_logits,
    remask_topk,
    sample_tokens,
    score_positions,
)

ROLES = ("seqbb", "sidechain", "refine")


@dataclass
class DenoiserOutput:
    logits: np.ndarray
    frames: RigidTransform
    torsions: TorsionSet | None = None


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 100
    activation: float = 0.8
    rot_schedule: Linear | Exponential = Exponential(10.0)
    decode: DecodeConfig = DecodeConfig()
    trans_std: float = 10.0
    seed: int = 0
    # t_S = t_T ** seq_time_exponent; 1.0 keeps both modalities on one grid.
    seq_time_exponent: float = 1.0
    binding_offset: float = 1.0
    binding_window: tuple[float, float] = (0.33, 0.66)

    def __post_init__(self):
        if self.steps < 2:
            raise InvalidArgumentError("steps must be >= 2")
        if not 0.0 < self.activation <= 1.0:
            raise InvalidArgumentError("activation threshold must lie in (0, 1]")
        if not self.trans_std > 0:
            raise InvalidArgumentError("trans_std must be positive")
        if not self.seq_time_exponent > 0:
            raise InvalidArgumentError("seq_time_exponent must be positive")
        lo, hi = self.binding_window
        if not 0.0 <= lo <= hi <= 1.0:
            raise InvalidArgumentError("binding window must satisfy 0 <= lo <= hi <= 1")

    def time_grids(self):
        t_t = np.linspace(0.0, 1.0, self.steps + 1)
        return t_t ** self.seq_time_exponent, t_t


@dataclass
class SamplingResult:
    complex: Complex
    trajectory: list = field(default_factory=list)


def _check_output(out, n, role):
    if not isinstance(out, DenoiserOutput):
        raise ContractError(f"{role} denoiser returned {type(out).__name__}, not DenoiserOutput")
    logits = np.asarray(out.logits)
    if logits.shape != (n, VOCAB_SIZE) or not np.all(np.isfinite(logits)):
        raise ContractError(f"{role} logits must be finite with shape ({n}, {VOCAB_SIZE}), got {logits.shape}")
    if out.frames.shape != (n,) or not np.all(np.isfinite(out.frames.trans)):
        raise ContractError(f"{role} frames must hold {n} finite transforms")
    if not is_rotation(out.frames.rot, atol=1e-6):
        raise ContractError(f"{role} returned invalid rotations")
    if role == "sidechain":
        if out.torsions is None or out.torsions.angles.shape != (n, 4):
            raise ContractError("sidechain role must return (N, 4) torsions")
    return out


class OracleDenoiser:
    """Returns a known target regardless of the noise level.

    With ``noise_scale > 0`` the ``seqbb`` role reports the target perturbed
    by deterministic pseudo-noise (seeded by ``seed`` and the call's times)
    while ``refine`` and ``sidechain`` stay clean.  When conditioning
    residues are present the target is first superimposed onto them.
    """

    thread_safe = True

    def __init__(self, target: Complex, noise_scale=0.0, seed=0, margin=20.0):
        if noise_scale < 0:
            raise InvalidArgumentError("noise_scale must be >= 0")
        for ch in target.chains:
            if np.any(ch.seq == MASK):
                raise InvalidArgumentError("oracle target must have a complete sequence")
            if ch.torsions.mask.shape != (len(ch), 4) or np.any(ch.torsions.mask != CHI_MASK[ch.seq]):
                raise InvalidArgumentError("oracle target must define every chi angle")
        self.target = target
        self.noise_scale = float(noise_scale)
        self.seed = int(seed)
        self.margin = margin
        self._offsets = np.cumsum([0] + list(target.lengths))
        self._seq = target.seq
        self._frames = target.frames
        self._torsions = target.torsions

    def _select(self, chain_index):
        lengths = self.target.lengths
        idx = []
        for k in dict.fromkeys(chain_index.tolist()):
            if not 0 <= k < len(lengths):
                raise InvalidArgumentError(f"oracle has no chain {k}")
            if np.count_nonzero(chain_index == k) != lengths[k]:
                raise InvalidArgumentError(f"request for chain {k} does not match target length {lengths[k]}")
            idx.extend(range(self._offsets[k], self._offsets[k + 1]))
        return np.array(idx, dtype=int)

    def __call__(self, seq, frames, t_s, t_t, role, *, torsions=None, chain_index=None, fixed_mask=None):
        if role not in ROLES:
            raise InvalidArgumentError(f"unknown role {role!r}")
        n = len(seq)
        chain_index = np.zeros(n, dtype=int) if chain_index is None else np.asarray(chain_index)
        idx = self._select(chain_index)
        rot = self._frames.rot[idx]
        trans = self._frames.trans[idx]
        if fixed_mask is not None and np.any(fixed_mask):
            fixed = np.asarray(fixed_mask, dtype=bool)
            src, dst = trans[fixed], frames.trans[fixed]
            if fixed.sum() >= 3:
                _, T = kabsch(src, dst)
            else:
                T = RigidTransform(np.eye(3), dst.mean(0) - src.mean(0))
            rot = T.rot @ rot
            trans = T.apply(trans)
        logits = one_hot_logits(self._seq[idx], self.margin)
        if role == "seqbb" and self.noise_scale > 0:
            g = np.random.default_rng([self.seed, int(round(t_s * 1e6)), int(round(t_t * 1e6))])
            trans = trans + g.standard_normal((n, 3)) * (self.noise_scale / math.sqrt(3.0))
            rot = rot @ so3_exp(g.standard_normal((n, 3)) * (0.1 * self.noise_scale / math.sqrt(3.0)))
            logits = logits + self.noise_scale * g.standard_normal(logits.shape)
        tors = self._torsions[idx]
        return DenoiserOutput(logits, FrameSet(rot, trans), TorsionSet(tors.angles.copy(), tors.mask.copy()))


def make_ground_truth_oracle(target: Complex):
    return OracleDenoiser(target, noise_scale=0.0)


def make_perturbed_oracle(target: Complex, noise_scale, rng_seed=0):
    return OracleDenoiser(target, noise_scale=noise_scale, seed=rng_seed)


def _state_string(tokens):
    """Sequence state after remasking, MASK shown as '-'."""
    return "".join("-" if t == MASK else AMINO_ACIDS[t] for t in tokens)


def _provisional_tokens(logits):
    return np.argmax(np.asarray(logits)[:, :NUM_AA], axis=-1).astype(np.int64)


def _run(denoiser, lengths, cfg: SamplerConfig, rng, fixed: Complex | None = None, stage=0):
    lengths = tuple(int(x) for x in lengths)
    if not lengths or min(lengths) < 1:
        raise InvalidArgumentError("every requested chain needs at least one residue")
    n_gen = sum(lengths)
    n_fix = 0 if fixed is None else fixed.num_residues
    n = n_fix + n_gen
    gen = slice(n_fix, n)
    fixed_mask = np.zeros(n, dtype=bool)
    fixed_mask[:n_fix] = True
    k0 = 0 if fixed is None else fixed.num_chains
    chain_index = np.concatenate(
        ([] if fixed is None else [fixed.chain_index()])
        + [np.full(m, k0 + k) for k, m in enumerate(lengths)]
    ).astype(int)

    seq = np.full(n, MASK, dtype=np.int64)
    prior = sample_prior(n_gen, rng, cfg.trans_std)
    if fixed is None:
        rot, trans = prior.rot, prior.trans
    else:
        seq[:n_fix] = fixed.seq
        ff = fixed.frames
        rot = np.concatenate([ff.rot, prior.rot])
        trans = np.concatenate([ff.trans, prior.trans])
    frames = FrameSet(rot, trans)

    def query(role, s, f, t_s, t_t, torsions=None):
        out = denoiser(s, f, t_s, t_t, role, torsions=torsions, chain_index=chain_index, fixed_mask=fixed_mask)
        return _check_output(out, n, role)

    grid_s, grid_t = cfg.time_grids()
    log = []
    logits = pred = None
    for k in range(cfg.steps):
        t_s, t_t = float(grid_s[k]), float(grid_t[k])
        dt = float(grid_t[k + 1] - grid_t[k])
        masked = int(np.count_nonzero(seq[gen] == MASK))
        out = query("seqbb", seq, frames, t_s, t_t)
        logits, pred = np.asarray(out.logits, dtype=float), out.frames
        refined = t_t >= cfg.activation
        if refined:
            guess = _provisional_tokens(logits)
            guess[:n_fix] = seq[:n_fix]
            sc = query("sidechain", guess, pred, t_s, t_t)
            rf = query("refine", guess, pred, t_s, t_t, torsions=sc.torsions)
            logits = blend_logits(logits, np.asarray(rf.logits, dtype=float), t_s, cfg.decode)
            pred = rf.frames
        if n_fix:
            pred = FrameSet(
                np.concatenate([frames.rot[:n_fix], pred.rot[gen]]),
                np.concatenate([frames.trans[:n_fix], pred.trans[gen]]),
            )

        tokens = sample_tokens(logits[gen], t_s, cfg.decode, rng)
        scores = score_positions(logits[gen], tokens, t_s, rng)
        seq[gen] = remask_topk(tokens, scores, float(grid_s[k + 1]))

        moved, v_trans, v_rot = euler_step(frames[gen], pred[gen], t_t, dt, cfg.rot_schedule)
        frames = FrameSet(
            np.concatenate([frames.rot[:n_fix], moved.rot]),
            np.concatenate([frames.trans[:n_fix], moved.trans]),
        )
        log.append(
            {
                "event": "step",
                "stage": stage,
                "step": k,
                "t_s": t_s,
                "t_t": t_t,
                "masked": masked,
                "refine_active": bool(refined),
                "mean_trans_speed": float(np.mean(np.linalg.norm(v_trans, axis=-1))),
                "mean_rot_tangent_norm": float(np.mean(np.linalg.norm(v_rot, axis=-1))),
                "state": _state_string(seq[gen]),
            }
        )

    final_seq = _provisional_tokens(logits)
    final_seq[:n_fix] = seq[:n_fix]
    sc = query("sidechain", final_seq, pred, 1.0, 1.0)

    chains = [] if fixed is None else list(fixed.chains)
    used = {c.chain_id for c in chains}
    ids = [c for c in _chain_ids(len(used) + len(lengths)) if c not in used]
    start = n_fix
    for cid, m in zip(ids, lengths):
        sl = slice(start, start + m)
        tors = TorsionSet(sc.torsions.angles[sl], CHI_MASK[final_seq[sl]])
        chains.append(build_chain(cid, final_seq[sl], pred[sl], tors))
        start += m
    return SamplingResult(Complex(chains, source_id="sampled"), log)


def run_sampling(denoiser, lengths, cfg=SamplerConfig(), rng=None):
    """Generate all requested chains jointly.  Returns a SamplingResult."""
    if sum(int(x) for x in lengths) < 1:
        raise InvalidArgumentError("nothing to sample")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    return _run(denoiser, lengths, cfg, rng)


def binding_site_rank(n, window, rng):
    """Random distance rank in ``[ceil(lo*n), floor(hi*n))``; falls back to the lower end."""
    lo = math.ceil(window[0] * n - 1e-9)
    hi = math.floor(window[1] * n + 1e-9)
    if hi > lo:
        r = int(rng.integers(lo, hi))
    else:
        r = lo
    return min(r, n - 1)


def place_for_next_chain(part: Complex, cfg: SamplerConfig, rng):
    """Move the generated part so a mid-ranked residue sits just past the origin.

    Returns the moved complex and a record of the placement.
    """
    ca = part.ca_coords()
    center = ca.mean(axis=0)
    dist = np.linalg.norm(ca - center, axis=-1)
    order = np.argsort(dist, kind="stable")
    rank = binding_site_rank(len(ca), cfg.binding_window, rng)
    res = int(order[rank])
    p = ca[res]
    norm = np.linalg.norm(p)
    direction = -p / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
    shift = -p + cfg.binding_offset * direction
    moved = part.translated(shift)
    record = {
        "event": "placement",
        "residues": int(len(ca)),
        "rank": rank,
        "residue": res,
        "direction": [float(x) for x in direction],
        "offset": float(cfg.binding_offset),
    }
    return moved, record


def chain_by_chain(denoiser, lengths, cfg=SamplerConfig(), rng=None):
    """Generate chains one at a time, each conditioned on all earlier chains."""
    lengths = tuple(int(x) for x in lengths)
    if len(lengths) < 2:
        raise InvalidArgumentError("chain-by-chain generation needs at least two chains")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    res = _run(denoiser, lengths[:1], cfg, rng, stage=0)
    part, log = res.complex, list(res.trajectory)
    for k in range(1, len(lengths)):
        part, record = place_for_next_chain(part, cfg, rng)
        record["stage"] = k
        log.append(record)
        res = _run(denoiser, lengths[k : k + 1], cfg, rng, fixed=part, stage=k)
        part = res.complex
        log.extend(res.trajectory)
    return SamplingResult(part, log)


def sample_many(denoiser, lengths, cfg, seeds, max_workers=None):
    """Independent trajectories, one per seed, in seed order.

    Runs in a thread pool only when the denoiser declares ``thread_safe``.
    """
    def one(seed):
        return run_sampling(denoiser, lengths, cfg, np.random.default_rng(seed))

    if getattr(denoiser, "thread_safe", False) and (max_workers or 0) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, seeds))
    return [one(s) for s in seeds]


class NullDenoiser:
    """Placeholder model: flat logits, frames echoed back, all chis zero.

    Sampling with it yields random sequences on the prior structure; it
    exists so the pipeline runs end to end before a trained model is plugged in.
    """

    thread_safe = True

    def __call__(self, seq, frames, t_s, t_t, role, *, torsions=None, chain_index=None, fixed_mask=None):
        n = len(seq)
        logits = np.zeros((n, VOCAB_SIZE))
        logits[:, MASK] = -20.0
        return DenoiserOutput(logits, frames.copy(), TorsionSet.empty(n))


def load_denoiser(spec):
    """Import ``"package.module:factory"`` and call the factory with no arguments."""
    import importlib

    module, _, attr = spec.partition(":")
    if not module or not attr:
        raise InvalidArgumentError(f"denoiser spec must look like 'module:factory', got {spec!r}")
    try:
        factory = getattr(importlib.import_module(module), attr)
    except (ImportError, AttributeError) as exc:
        raise InvalidArgumentError(f"cannot load denoiser {spec!r}: {exc}") from None
    return factory()
