"""Shared fixtures.

The desk-scale pipeline run is expensive enough (~10 s) that the
end-to-end tests share a single session-scoped output directory
instead of each re-running the pipeline.
"""

import json
import time

import pytest

from rcaghost.config import profile_config
from rcaghost.pipeline import run_stage


@pytest.fixture(scope="session")
def desk_config():
    return profile_config("desk")


@pytest.fixture(scope="session")
def desk_run(tmp_path_factory, desk_config):
    """Full desk pipeline (simulate -> beamform -> filter -> metrics).

    Returns the output directory.  Wall-clock time for the run is
    stashed in elapsed_s.json so the acceptance gate can assert on it.
    """
    out = tmp_path_factory.mktemp("desk_run")
    start = time.perf_counter()
    run_stage("all", desk_config, out_dir=out)
    elapsed = time.perf_counter() - start
    (out / "elapsed_s.json").write_text(json.dumps({"elapsed_s": elapsed}))
    return out


@pytest.fixture(scope="session")
def cyst_run(tmp_path_factory):
    """Full pipeline on the anechoic-cyst phantom."""
    out = tmp_path_factory.mktemp("cyst_run")
    run_stage("all", profile_config("desk-cyst"), out_dir=out)
    return out
