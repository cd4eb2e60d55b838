"""Desk-scale laboratory for adapter-based debiasing of masked language models.

Pieces: a toy transformer encoder with injectable bottleneck adapters,
counterfactual data augmentation, a suite of intrinsic/extrinsic bias
metrics, and a CLI harness for debias training, downstream fine-tuning,
and fairness-forgetting sweeps.
"""

__version__ = "0.1.0"
