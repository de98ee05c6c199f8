"""Seeded experiment runner: configs, CSV artifacts, and the CLI."""

from .experiments import EXPERIMENTS, run_experiment

__all__ = ["EXPERIMENTS", "run_experiment"]
