"""Continuous flow matching on SE(3).

Translations follow a linear interpolant; rotations follow the SO(3)
geodesic, either with the linear schedule used for training or with the
exponential schedule ``kappa(t) = exp(-c t)`` used at inference.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, TimeSingularityError
from .geom3 import RigidTransform, geodesic, orthonormalize, random_rotation, so3_exp, so3_log

# A per-residue frame set is a RigidTransform with a leading residue axis.
FrameSet = RigidTransform

T_SINGULAR = 1e-6


@dataclass(frozen=True)
class Linear:
    pass


@dataclass(frozen=True)
class Exponential:
    c: float = 10.0

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidArgumentError("Exponential schedule needs c > 0")


ScheduleKind = Linear | Exponential


def schedule_fraction(t, sched):
    """Geodesic parameter reached at time ``t`` under ``sched``."""
    t = np.asarray(t, dtype=float)
    if isinstance(sched, Exponential):
        return 1.0 - np.exp(-sched.c * t)
    return t


def _check_unit(t, name="t"):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > 1):
        raise InvalidArgumentError(f"{name} must lie in [0, 1]")
    return t


def interp_trans(x0, x1, t):
    t = _check_unit(t)
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    return (1.0 - t)[..., None] * x0 + t[..., None] * x1 if t.ndim else (1.0 - t) * x0 + t * x1


def interp_rot(R0, R1, t, sched=Linear()):
    t = _check_unit(t)
    return geodesic(R0, R1, schedule_fraction(t, sched))


def _check_singular(t):
    if np.any(np.asarray(t) >= 1.0 - T_SINGULAR):
        raise TimeSingularityError(f"vector field undefined at t={t} (too close to 1)")


def vf_trans(xt, x1, t):
    """Conditional translation velocity ``(x1 - xt) / (1 - t)``."""
    _check_singular(t)
    t = np.asarray(t, dtype=float)
    d = np.asarray(x1, dtype=float) - np.asarray(xt, dtype=float)
    return d / (1.0 - t)[..., None] if t.ndim else d / (1.0 - t)


def vf_rot(Rt, R1, t, sched=Linear()):
    """Body-frame rotational velocity at ``Rt`` pointing to ``R1``."""
    Rt = np.asarray(Rt, dtype=float)
    v = so3_log(np.swapaxes(Rt, -1, -2) @ np.asarray(R1, dtype=float))
    if isinstance(sched, Exponential):
        return sched.c * v
    _check_singular(t)
    t = np.asarray(t, dtype=float)
    return v / (1.0 - t)[..., None] if t.ndim else v / (1.0 - t)


def euler_step(frames: FrameSet, target_pred: FrameSet, t, dt, sched=Exponential()):
    """One Euler step of the SE(3) probability-flow ODE.

    Translations always use the linear-schedule field; rotations use ``sched``.
    Returns the new frames plus the per-residue translation and rotation
    velocities used for the step.
    """
    if dt <= 0:
        raise InvalidArgumentError("dt must be positive")
    if t + dt > 1.0 + 1e-12:
        raise InvalidArgumentError(f"t + dt = {t + dt} exceeds 1")
    v_trans = vf_trans(frames.trans, target_pred.trans, t)
    v_rot = vf_rot(frames.rot, target_pred.rot, t, sched)
    trans = frames.trans + dt * v_trans
    rot = orthonormalize(frames.rot @ so3_exp(dt * v_rot))
    return FrameSet(rot, trans), v_trans, v_rot


def sample_prior(n, rng, trans_std=10.0):
    """Uniform SO(3) rotations and centred isotropic Gaussian translations."""
    if n < 1:
        raise InvalidArgumentError("sample_prior needs n >= 1")
    rot = random_rotation(rng, n)
    trans = trans_std * rng.standard_normal((n, 3))
    trans -= trans.mean(axis=0, keepdims=True)
    return FrameSet(rot, trans)


def corrupt_frames(frames1: FrameSet, t, rng, trans_std=10.0, sched=Linear()):
    """Sample ``T_t`` on the conditional path from a prior draw to ``frames1``."""
    t = float(_check_unit(t))
    prior = sample_prior(len(frames1), rng, trans_std)
    trans = interp_trans(prior.trans, frames1.trans, t)
    rot = interp_rot(prior.rot, frames1.rot, np.full(len(frames1), t), sched)
    return FrameSet(rot, trans)
