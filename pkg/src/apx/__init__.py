"""Executable asymptotics: perturbation-method formulas paired with
numerical cross-checks, an experiment registry, and a small service/CLI."""

__version__ = "0.1.0"
