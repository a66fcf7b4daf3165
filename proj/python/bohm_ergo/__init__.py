"""Python access to the bohm-ergo scenario runner."""

import json

from ._core import (
    BohmError,
    ParseError,
    SchemaError,
    SerializationError,
    __version__,
    default_config,
    normalize_config,
    scenario_names,
)
from . import _core

__all__ = [
    "BohmError",
    "ParseError",
    "SchemaError",
    "SerializationError",
    "__version__",
    "default_config",
    "normalize_config",
    "run",
    "scenario_names",
]


def run(config, threads=1, out_dir=None):
    """Run a scenario. `config` is a dict or JSON text.

    Returns a dict with the parsed summary, the plotted trajectories as
    rows of [t, y1, ...], and the histogram as (edges, counts) or None.
    """
    text = config if isinstance(config, str) else json.dumps(config)
    raw = _core.run(text, threads, None if out_dir is None else str(out_dir))
    raw["summary"] = json.loads(raw["summary"])
    return raw
