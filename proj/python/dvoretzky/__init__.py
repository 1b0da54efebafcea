"""Random covering of the circle: simulation and verification tools."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import __version__, run_json


def run(config):
    """Run an experiment described by a dict; returns the manifest dict."""
    return _json.loads(run_json(_json.dumps(config)))
