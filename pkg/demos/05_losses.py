"""Loss evaluators on a small synthetic complex and a perturbed copy."""
import numpy as np

from protcogen import losses as L
from protcogen.allatom import CHI_PI_PERIODIC, TorsionSet
from protcogen.flowmatch import FrameSet
from protcogen.geom3 import random_transform, so3_exp
from protcogen.seqflow import one_hot_logits
from protcogen.synthetic import random_complex

rng = np.random.default_rng(4)
truth = random_complex((12, 10), rng)
f1 = truth.frames
noisy = FrameSet(f1.rot @ so3_exp(0.1 * rng.normal(size=(len(f1), 3))), f1.trans + 0.5 * rng.normal(size=(len(f1), 3)))

print("backbone FAPE, clean vs noisy:", L.loss_fape_backbone(noisy, f1))
T = random_transform(rng)
print("unchanged after moving the prediction rigidly:", L.loss_fape_backbone(T.compose(noisy), f1))
print("distogram:", L.loss_distogram(noisy.trans, f1.trans))

logits = one_hot_logits(truth.seq, margin=3.0)
print("cross entropy at margin 3:", L.loss_discrete(logits, truth.seq))
print("correction:", L.loss_correction(logits, noisy, truth.seq, f1))

tors = truth.torsions
flipped = TorsionSet(tors.angles + np.pi, tors.mask)
sym = CHI_PI_PERIODIC[truth.seq]
print("chi loss of a pi shift, no symmetry:", L.loss_chi(flipped, tors))
print("chi loss of a pi shift, with symmetry:", L.loss_chi(flipped, tors, sym))
