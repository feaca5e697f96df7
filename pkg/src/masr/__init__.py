"""Measurement-adaptive sparse image sampling with cellular-automaton recovery."""

from .imgcore import read_pbm, read_pgm, write_pbm, write_pgm
from .metrics import nre, psnr, ssim
from .pipeline import RunConfig, bench, roundtrip
from .recovery import convergence_probe, postprocess, recover
from .sampler import SamplerConfig, random_baseline_mask, sample_image

__version__ = "0.1.0"
