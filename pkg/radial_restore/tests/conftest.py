import os

import pytest

from radial_restore.runconfig import ENV_PREFIX


@pytest.fixture(autouse=True)
def env(tmp_path, monkeypatch):
    """Point the Jupyter config and data dirs at ``tmp_path`` and drop our overrides."""
    monkeypatch.setenv("JUPYTER_CONFIG_DIR", str(tmp_path / "config"))
    monkeypatch.setenv("JUPYTER_DATA_DIR", str(tmp_path / "data"))
    for key in list(os.environ):
        if key.startswith(ENV_PREFIX):
            monkeypatch.delenv(key)
    return tmp_path


@pytest.fixture()
def workdir(env):
    """A scratch directory inside the patched environment."""
    path = os.path.join(os.environ["JUPYTER_DATA_DIR"], "work")
    os.makedirs(path)
    return path
