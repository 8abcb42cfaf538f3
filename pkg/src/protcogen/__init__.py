"""Flow-matching protein complex co-design: geometry, flows, losses, data and sampling."""
from .errors import *  # noqa: F401,F403
from .geom3 import RigidTransform
from .flowmatch import Exponential, FrameSet, Linear
from .allatom import TorsionSet
from .proteinio import Chain, Complex, parse_pdb, read_pdb, write_pdb
from .sampler import SamplerConfig, make_ground_truth_oracle, make_perturbed_oracle, run_sampling, chain_by_chain

__version__ = "0.1.0"
