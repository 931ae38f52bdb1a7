"""Deterministic simulation kernel: world model, traces, metrics."""

from .engine import Agent, Msg, World, make_world
from .metrics import coverage_check, metrics, verify
from .trace import SimTrace

__all__ = [
    "Agent",
    "Msg",
    "World",
    "make_world",
    "coverage_check",
    "metrics",
    "verify",
    "SimTrace",
]
