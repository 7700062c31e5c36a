"""
utils:
- natural ordering of identifiers, so that ``s2`` sorts before ``s10``.
- seed derivation: one global seed fans out into independent sub-seeds.
- locating bundled data files.
"""
import os
import re
from functools import lru_cache
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
import pandas as pd

_digits = re.compile(r"(\d+)")

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@lru_cache(maxsize=None)
def natural_key(ident: str) -> Tuple[Union[int, str], ...]:
    """Sort key that compares runs of digits numerically."""
    parts = _digits.split(ident)
    return tuple(int(p) if p.isdigit() else p for p in parts)


def natural_sorted(idents: Iterable[str]) -> List[str]:
    return sorted(idents, key=natural_key)


def sub_seed(seed: int, *key: int) -> np.random.SeedSequence:
    """The sub-seed at ``key`` under ``seed``.

    Sub-seeds are addressed rather than drawn in sequence, so asking for more
    samples never changes the ones already derived.
    """
    return np.random.SeedSequence(seed, spawn_key=tuple(key))


def sub_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(sub_seed(seed, *key))


def _filefind(filename, path_dirs=None):
    """Find a file by looking through a sequence of paths.

    Returns the absolute path of the first match. An absolute ``filename``
    that exists is returned as is; otherwise each entry of ``path_dirs`` is
    joined with ``filename`` after :func:`_expand_path`.

    Raises :exc:`IOError` when nothing matches.
    """

    # If paths are quoted, abspath gets confused, strip them...
    filename = filename.strip('"').strip("'")
    if os.path.isabs(filename) and os.path.isfile(filename):
        return filename

    if path_dirs is None:
        path_dirs = ("",)
    elif isinstance(path_dirs, str):
        path_dirs = (path_dirs,)

    for path in path_dirs:
        if path == ".":
            path = os.getcwd()
        testname = _expand_path(os.path.join(path, filename))
        if os.path.isfile(testname):
            return os.path.abspath(testname)

    raise IOError(
        "File {!r} does not exist in any of the search paths: {!r}".format(filename, path_dirs)
    )


def _expand_path(s):
    """Expand $VARS and ~names in a string, like a shell"""
    return os.path.expandvars(os.path.expanduser(s))


def data_file(*parts: str) -> str:
    """Absolute path of a file bundled under ``radial_restore/data``."""
    return _filefind(os.path.join(*parts), (DATA_DIR,))


def write_csv(
    path: str, rows: Iterable[dict], columns: List[str], comment: Optional[str] = None
) -> None:
    """Write ``rows`` as CSV with a fixed float format, after an optional ``#`` line."""
    frame = pd.DataFrame(list(rows), columns=columns)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if comment:
            f.write("# %s\n" % comment)
        frame.to_csv(f, index=False, float_format="%.12g")
