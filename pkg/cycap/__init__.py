"""
cycap - Cycle Cancel and Patch

Tour improvement for the directed and symmetric Traveling Salesman Problem by
canceling negative tour-alternating cycles or circulations found in a
separated residual graph, then patching the resulting subtours.

Usage:
    from cycap.core.instance import load_instance
    from cycap.core.pipeline import PipelineConfig, run_pipeline
    from cycap.bench.harness import experiment
"""

__version__ = "1.0.0"
__author__ = "cycap"
