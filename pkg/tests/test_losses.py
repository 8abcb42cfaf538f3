import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import loss_oracles as ref
from protcogen import losses as L
from protcogen.allatom import CHI_MASK, CHI_PI_PERIODIC, TorsionSet
from protcogen.errors import InvalidArgumentError, ShapeError
from protcogen.flowmatch import FrameSet
from protcogen.geom3 import RigidTransform, random_rotation, random_transform, so3_exp
from protcogen.sampler import DenoiserOutput
from protcogen.seqflow import MASK, VOCAB_SIZE, one_hot_logits

seeds = st.integers(0, 2**32 - 1)
sizes = st.integers(1, 8)


def rand_frames(g, n, scale=5.0):
    return FrameSet(random_rotation(g, n), g.normal(size=(n, 3)) * scale)


def moved(T, frames):
    return T.compose(frames)


# -- SE(3) flow matching ---------------------------------------------------

def test_se3_examples():
    z = np.zeros((1, 3))
    assert L.loss_se3_fm(z, z, z, z) == 0.0
    assert L.loss_se3_fm([[1, 0, 0]], z, z, z) == 1.0
    with pytest.raises(ShapeError):
        L.loss_se3_fm(np.zeros((2, 3)), z, z, z)


@settings(max_examples=50, deadline=None)
@given(seeds, sizes)
def test_se3_matches_oracle(seed, n):
    g = np.random.default_rng(seed)
    a = [g.normal(size=(n, 3)) for _ in range(4)]
    assert abs(L.loss_se3_fm(*a) - ref.se3_fm(*a)) < 1e-12


# -- discrete --------------------------------------------------------------

def test_discrete_examples(rng):
    s = rng.integers(0, 20, 10)
    assert L.loss_discrete(one_hot_logits(s, margin=1e4), s) < 1e-4
    flat = np.zeros((10, VOCAB_SIZE))
    flat[:, MASK] = 7.0  # mask column never enters the normalisation
    assert L.loss_discrete(flat, s) == pytest.approx(np.log(20), abs=1e-12)
    assert L.loss_discrete(flat, s, positions=[]) == 0.0
    with pytest.raises(InvalidArgumentError):
        L.loss_discrete(flat, np.array([MASK] * 10))


@settings(max_examples=50, deadline=None)
@given(seeds, sizes)
def test_discrete_matches_oracle(seed, n):
    g = np.random.default_rng(seed)
    logits = g.normal(size=(n, VOCAB_SIZE)) * 3
    s = g.integers(0, 20, n)
    assert abs(L.loss_discrete(logits, s) - ref.cross_entropy(logits, s)) < 1e-12
    pos = g.random(n) < 0.5
    if pos.any():
        want = ref.cross_entropy(logits[pos], s[pos])
        assert abs(L.loss_discrete(logits, s, positions=pos) - want) < 1e-12


# -- consistency -----------------------------------------------------------

def _pred(g, n):
    return DenoiserOutput(g.normal(size=(n, VOCAB_SIZE)), rand_frames(g, n))


def test_consistency_examples(rng):
    a, b = _pred(rng, 4), _pred(rng, 4)
    assert L.loss_consistency(a, a, 0.7, 0.4) == 0.0
    assert L.loss_consistency(a, b, 0.0, 0.0) == 0.0
    logits = np.zeros((1, VOCAB_SIZE))
    f0 = FrameSet(np.eye(3)[None], np.zeros((1, 3)))
    f1 = FrameSet(np.eye(3)[None], np.array([[3.0, 4.0, 0.0]]))
    cfg = L.ConsistencyConfig(dim_t=12)
    val = L.loss_consistency(DenoiserOutput(logits, f1), DenoiserOutput(logits, f0), 1.0, 1.0, cfg)
    c = 0.00054 * np.sqrt(12)
    assert val == pytest.approx(np.sqrt(625 + c * c) - c, abs=1e-12)
    assert val == pytest.approx(24.99813, abs=1e-5)


def test_consistency_config_validation():
    with pytest.raises(InvalidArgumentError):
        L.ConsistencyConfig(dim_s=0)
    with pytest.raises(InvalidArgumentError):
        L.ConsistencyConfig(delta_t=1.0)


@settings(max_examples=40, deadline=None)
@given(seeds, sizes, st.floats(0, 1), st.floats(0, 1))
def test_consistency_matches_oracle(seed, n, t_s, t_t):
    g = np.random.default_rng(seed)
    a, b = _pred(g, n), _pred(g, n)
    got = L.loss_consistency(a, b, t_s, t_t)
    want = ref.consistency(a.logits, a.frames, b.logits, b.frames, t_s, t_t)
    assert abs(got - want) < 1e-12


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_consistency_monotone_in_time(seed, t0, t1, other):
    g = np.random.default_rng(seed)
    a, b = _pred(g, 3), _pred(g, 3)
    lo, hi = sorted((t0, t1))
    assert L.loss_consistency(a, b, lo, other) <= L.loss_consistency(a, b, hi, other)
    assert L.loss_consistency(a, b, other, lo) <= L.loss_consistency(a, b, other, hi)


# -- FAPE ------------------------------------------------------------------

def test_fape_examples(rng):
    f = rand_frames(rng, 5)
    x = rng.normal(size=(9, 3)) * 4
    assert L.loss_fape(f, x, f, x) == 0.0
    one = FrameSet(np.eye(3)[None], np.zeros((1, 3)))
    assert L.loss_fape(one, [[5.0, 0, 0]], one, [[0.0, 0, 0]]) == pytest.approx(0.5)
    assert L.loss_fape(one, [[50.0, 0, 0]], one, [[0.0, 0, 0]]) == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        L.loss_fape(f, x, f, x[:3])
    with pytest.raises(InvalidArgumentError):
        L.FapeConfig(clamp=0)


def test_fape_rigid_invariance(rng):
    pf, tf = rand_frames(rng, 6), rand_frames(rng, 6)
    pa, ta = rng.normal(size=(12, 3)) * 6, rng.normal(size=(12, 3)) * 6
    base = L.loss_fape(pf, pa, tf, ta)
    for _ in range(100):
        T = random_transform(rng)
        assert abs(L.loss_fape(moved(T, pf), apply(T, pa), tf, ta) - base) < 1e-9


def apply(T, x):
    return x @ T.rot.T + T.trans


@settings(max_examples=30, deadline=None)
@given(seeds, sizes, st.integers(1, 8))
def test_fape_matches_oracle(seed, n, m):
    g = np.random.default_rng(seed)
    pf, tf = rand_frames(g, n), rand_frames(g, n)
    pa, ta = g.normal(size=(m, 3)) * 8, g.normal(size=(m, 3)) * 8
    assert abs(L.loss_fape(pf, pa, tf, ta) - ref.fape(pf, pa, tf, ta)) < 1e-12
    bb = L.loss_fape_backbone(pf, tf)
    want = ref.fape(pf, L.backbone_atoms(pf), tf, L.backbone_atoms(tf))
    assert abs(bb - want) < 1e-12


# -- distogram -------------------------------------------------------------

def test_distogram_examples(rng):
    x = rng.normal(size=(6, 3))
    assert L.loss_distogram(x, x) == 0.0
    assert L.loss_distogram([[0, 0, 0], [5, 0, 0]], [[0, 0, 0], [0, 3, 0]]) == pytest.approx(4.0)
    with pytest.raises(InvalidArgumentError):
        L.loss_distogram(x[:1], x[:1])


def test_distogram_rigid_invariance(rng):
    p, t = rng.normal(size=(7, 3)) * 5, rng.normal(size=(7, 3)) * 5
    base = L.loss_distogram(p, t)
    for _ in range(100):
        val = L.loss_distogram(apply(random_transform(rng), p), apply(random_transform(rng), t))
        assert abs(val - base) < 1e-9


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(2, 8))
def test_distogram_matches_oracle(seed, n):
    g = np.random.default_rng(seed)
    p, t = g.normal(size=(n, 3)) * 5, g.normal(size=(n, 3)) * 5
    assert abs(L.loss_distogram(p, t) - ref.distogram(p, t)) < 1e-12


# -- correction / refine ---------------------------------------------------

def test_correction_examples(rng):
    s = rng.integers(0, 20, 5)
    f = rand_frames(rng, 5)
    assert L.loss_correction(one_hot_logits(s, 1e4), f, s, f) < 1e-4
    flip = FrameSet(np.diag([-1.0, -1.0, 1.0])[None], np.zeros((1, 3)))
    ident = FrameSet(np.eye(3)[None], np.zeros((1, 3)))
    val = L.loss_correction(one_hot_logits([0], 1e4), flip, np.array([0]), ident)
    assert val == pytest.approx(8.0, abs=1e-9)
    with pytest.raises(ShapeError):
        L.loss_correction(one_hot_logits(s), f, s, rand_frames(rng, 4))


@settings(max_examples=40, deadline=None)
@given(seeds, sizes)
def test_correction_matches_oracle(seed, n):
    g = np.random.default_rng(seed)
    logits = g.normal(size=(n, VOCAB_SIZE))
    s = g.integers(0, 20, n)
    f, t = rand_frames(g, n), rand_frames(g, n)
    assert abs(L.loss_correction(logits, f, s, t) - ref.correction(logits, f, s, t)) < 1e-12


def test_refine_total():
    assert L.loss_refine_total(0, 0, 0) == 0.0
    assert L.loss_refine_total(1, 2, 4) == pytest.approx(2.5)


@given(*(st.floats(-1e3, 1e3) for _ in range(4)))
def test_refine_total_linear(a, b, c, d):
    assert L.loss_refine_total(a + d, b, c) == pytest.approx(L.loss_refine_total(a, b, c) + d, abs=1e-9)
    assert L.loss_refine_total(a, b + d, c) == pytest.approx(L.loss_refine_total(a, b, c) + 0.25 * d, abs=1e-9)
    assert L.loss_refine_total(a, b, c + d) == pytest.approx(L.loss_refine_total(a, b, c) + 0.25 * d, abs=1e-9)


# -- chi -------------------------------------------------------------------

def _phe_torsions(chi2):
    ang = np.zeros((1, 4))
    ang[0, :2] = [1.0, chi2 % (2 * np.pi)]
    return TorsionSet(ang, CHI_MASK[[13]])


def test_chi_examples():
    t = _phe_torsions(1.5)
    sym = CHI_PI_PERIODIC[[13]]
    assert L.loss_chi(t, t, sym) == 0.0
    assert L.loss_chi(_phe_torsions(1.5 + np.pi), t, sym) == pytest.approx(0.0, abs=1e-12)
    lys = CHI_MASK[[11]]
    a = TorsionSet(np.array([[0.3, 1.0, 2.0, 3.0]]), lys)
    b = TorsionSet(np.array([[0.3 + np.pi / 2, 1.0, 2.0, 3.0]]), lys)
    assert L.loss_chi(b, a, CHI_PI_PERIODIC[[11]]) == pytest.approx(2.0 / 4, abs=1e-12)
    one = TorsionSet(np.array([[0.3, 0, 0, 0]]), [[True, False, False, False]])
    two = TorsionSet(np.array([[0.3 + np.pi / 2, 0, 0, 0]]), [[True, False, False, False]])
    assert L.loss_chi(two, one) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ShapeError):
        L.loss_chi(one, TorsionSet(np.zeros((1, 4)), [[True, True, False, False]]))


@settings(max_examples=50, deadline=None)
@given(seeds, sizes)
def test_chi_matches_oracle(seed, n):
    g = np.random.default_rng(seed)
    seq = g.integers(0, 20, n)
    mask = CHI_MASK[seq]
    p = TorsionSet(g.uniform(0, 2 * np.pi, (n, 4)), mask)
    t = TorsionSet(g.uniform(0, 2 * np.pi, (n, 4)), mask)
    sym = CHI_PI_PERIODIC[seq]
    assert abs(L.loss_chi(p, t, sym) - ref.chi(p.angles, t.angles, mask, sym)) < 1e-12


# -- general properties ----------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 8))
def test_all_losses_nonnegative_and_zero_at_truth(seed, n):
    g = np.random.default_rng(seed)
    f, h = rand_frames(g, n), rand_frames(g, n)
    x = g.normal(size=(n, 3))
    s = g.integers(0, 20, n)
    logits = g.normal(size=(n, VOCAB_SIZE))
    assert L.loss_fape(f, x, h, x + 1) >= 0 and L.loss_fape(f, x, f, x) == 0
    assert L.loss_distogram(f.trans, h.trans) >= 0 and L.loss_distogram(f.trans, f.trans) == 0
    assert L.loss_correction(logits, f, s, h) >= 0
    assert L.loss_discrete(logits, s) >= 0
    a, b = DenoiserOutput(logits, f), DenoiserOutput(g.normal(size=logits.shape), h)
    assert L.loss_consistency(a, b, 0.5, 0.5) >= 0 and L.loss_consistency(a, a, 0.5, 0.5) == 0


def test_weighted_sums():
    assert L.loss_seqbb(1.0, 2.0) == pytest.approx(1.6)
    assert L.loss_packing(0.5, 0.25) == 0.75
