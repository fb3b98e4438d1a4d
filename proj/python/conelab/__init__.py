"""Weighted log-Sobolev inequalities on convex cones: constants, deficits,
Hopf-Lax semigroups, hypercontractivity and 1D transport."""

import json

from ._core import *  # noqa: F401,F403
from ._core import ConelabError, __version__, _run_experiment


def run_experiment(config, seed=None):
    """Run a CLI-style experiment config (a dict) and return the report dict."""
    return json.loads(_run_experiment(json.dumps(config), seed))
