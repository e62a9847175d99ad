"""First-order Bayesian network specifications: grounding, exact inference, codecs,
and a desk-scale checker for the PP capture construction."""

__version__ = "0.1.0"
