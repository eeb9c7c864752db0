"""Screening engine for unlicensed corporate service providers.

Pipeline: registry ingestion -> entity graph -> licensed-CSP population ->
ego-network features -> kNN red-flagging -> penalized-logit validation ->
human annotation -> beta-binomial sector-size estimation.
"""

__version__ = "0.1.0"
