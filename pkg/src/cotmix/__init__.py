"""Toolkit for chain-of-thought distillation data pipelines.

Builds verified teacher reasoning corpora by rejection sampling, mixes them
into blended SFT datasets, evaluates students on math benchmarks through
OpenAI-compatible endpoints, and computes gap / distribution analytics
between the resulting score reports.
"""

__version__ = "0.1.0"
