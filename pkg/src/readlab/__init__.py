"""Exact experiments on Read-type renormings of sequence spaces."""
from .core import FiniteVector, ReadlabError, vec
from .renorm import (AcostaSpec, BallSumSpec, ReadNormSpec, acosta_norm, build_read_spec,
                     p_norm, smooth_variant)
from .dualgeom import (DualBallRep, dual_norm_gauge, dual_norm_support, read_dual_norm,
                       supporting_functional)
from .attain import (attainment_verdict, certificate_check, dichotomy_certificate,
                     generate_attaining_pair, replay_certificate)

__version__ = "0.1.0"

__all__ = ["FiniteVector", "ReadlabError", "vec", "AcostaSpec", "BallSumSpec", "ReadNormSpec",
           "acosta_norm", "build_read_spec", "p_norm", "smooth_variant", "DualBallRep",
           "dual_norm_gauge", "dual_norm_support", "read_dual_norm", "supporting_functional",
           "attainment_verdict", "certificate_check", "dichotomy_certificate",
           "generate_attaining_pair", "replay_certificate"]
