"""Search-Lyapunov-function algorithm generator."""

import json

from ._core import *  # noqa: F401,F403
from ._core import Error, Trace


def summary(trace: Trace) -> dict:
    """Summary of a run as a plain dict (same schema as the CLI output)."""
    return json.loads(trace.summary_json())


def records(trace: Trace) -> list:
    """Per-iteration records as dicts (same schema as the JSONL trace)."""
    return [json.loads(line) for line in trace.trace_jsonl().splitlines()]
