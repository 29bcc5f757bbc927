"""Corner-domain water-wave laboratory."""

import json as _json

from ._core import (  # noqa: F401
    Domain,
    LabError,
    build_beach,
    build_box,
    build_sector,
    dtn_eigenvalues,
    pencil_roots,
    regularity_threshold,
    singular_exponents,
    taylor_coefficient,
)
from ._core import run as _run


def run(command, config):
    """Run a subcommand. `config` is a dict or a JSON string; returns {file name: content}."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _run(command, config)


__all__ = [
    "Domain",
    "LabError",
    "build_beach",
    "build_box",
    "build_sector",
    "dtn_eigenvalues",
    "pencil_roots",
    "regularity_threshold",
    "run",
    "singular_exponents",
    "taylor_coefficient",
]
