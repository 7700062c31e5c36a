"""Reading and writing network documents

A network document is the JSON hand-off between command-line stages: the
vertices, edges and root of a :class:`~radial_restore.netgraph.Network`,
the active spanning tree, and whatever the writing stage adds under
``extra``.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import json
import os
import tempfile
from typing import Any
from typing import Dict
from typing import Iterable
from typing import Mapping
from typing import Optional
from typing import Tuple

from . import jsonutil
from ._version import __version__
from ._version import network_format_version
from ._version import network_format_version_info
from .errors import ParseError
from .netgraph import Network
from .utils import natural_sorted

NETWORK_FORMAT = "radial_restore.network"

NetworkDocument = Dict[str, Any]


def network_document(
    net: Network,
    tree_edges: Optional[Iterable[str]] = None,
    extra: Optional[Mapping[str, Any]] = None,
) -> NetworkDocument:
    """The JSON-ready document for ``net`` with ``tree_edges`` as its active tree.

    When ``tree_edges`` is not given the network's default tree is used.
    """
    if tree_edges is None:
        tree_edges = net.default_tree if net.default_tree is not None else ()
    doc: NetworkDocument = net.to_dict()
    doc["tree"] = natural_sorted(tree_edges)
    doc["format"] = NETWORK_FORMAT
    doc["format_version"] = network_format_version
    doc["version"] = __version__
    doc["extra"] = dict(extra or {})
    return doc


def write_network_file(
    fname: Optional[str] = None,
    net: Optional[Network] = None,
    tree_edges: Optional[Iterable[str]] = None,
    extra: Optional[Mapping[str, Any]] = None,
) -> Tuple[str, NetworkDocument]:
    """Write a network document and return its path and contents.

    Parameters
    ----------

    fname : str, optional
        The path to the file to write. A temporary ``.json`` file is created
        when it is not given.

    net : Network
        The network to write.

    tree_edges : iterable of str, optional
        The active spanning tree; defaults to ``net.default_tree``.

    extra : dict, optional
        Stage-specific data such as the config echo.
    """
    if net is None:
        raise ValueError("A network is required")
    if not fname:
        fd, fname = tempfile.mkstemp(".json")
        os.close(fd)
    doc = network_document(net, tree_edges, extra)
    with open(fname, "w", encoding="utf-8") as f:
        f.write(jsonutil.dumps(doc))
    return fname, doc


def load_network_document(
    doc: Mapping[str, Any], path: str = ""
) -> Tuple[Network, NetworkDocument]:
    """Build the network described by ``doc``; its ``tree`` becomes the default tree."""
    if doc.get("format", NETWORK_FORMAT) != NETWORK_FORMAT:
        raise ParseError("not a network document (format %r)" % doc.get("format"), path)
    version = str(doc.get("format_version", network_format_version))
    try:
        major = int(version.split(".")[0])
    except ValueError:
        raise ParseError("bad format_version %r" % version, path, 0, "format_version")
    if major != network_format_version_info[0]:
        raise ParseError(
            "format_version %s cannot be read by %s" % (version, network_format_version),
            path,
            0,
            "format_version",
        )
    for key in ("root", "vertices", "edges"):
        if key not in doc:
            raise ParseError("missing key %r" % key, path, 0, key)
    try:
        net = Network.from_dict(doc, default_tree=doc.get("tree"))
    except (KeyError, TypeError) as e:
        raise ParseError("malformed network document: %s" % e, path)
    return net, dict(doc)


def read_network_file(fname: str) -> Tuple[Network, NetworkDocument]:
    """Load a network document written by :func:`write_network_file`."""
    try:
        with open(fname, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, fname, e.lineno, str(e.colno))
    except OSError as e:
        raise ParseError(e.strerror or str(e), fname)
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", fname)
    return load_network_document(doc, fname)
