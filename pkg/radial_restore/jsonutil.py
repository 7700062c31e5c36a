"""Utilities to manipulate JSON objects written as artifacts."""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import json
import math
import numbers
import types
from collections.abc import Mapping
from typing import Any

# significant digits kept for floats in artifacts; reruns must be byte-identical
FLOAT_DIGITS = 12


def _clean_float(value: float) -> Any:
    if not math.isfinite(value):
        return repr(value)
    return float("%.*g" % (FLOAT_DIGITS, value))


def json_clean(obj):
    """Turn ``obj`` into plain JSON types with stable float text.

    numpy scalars and arrays, tuples, sets (sorted) and frozen mappings all become
    their JSON counterparts, as does anything with a ``to_dict`` method.
    Floats are rounded to :data:`FLOAT_DIGITS` significant digits;
    non-finite floats become their reprs.
    """
    # bools are Integrals, which are Reals: check in that order.
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, numbers.Integral):
        return int(obj)
    if isinstance(obj, numbers.Real):
        return _clean_float(float(obj))

    if hasattr(obj, "tolist"):
        # numpy arrays and numpy scalars such as bool_
        return json_clean(obj.tolist())
    if hasattr(obj, "to_dict"):
        return json_clean(obj.to_dict())

    if isinstance(obj, Mapping):
        keys = [str(k) for k in obj]
        if len(set(keys)) != len(keys):
            raise ValueError("Keys %r collide once converted to strings" % sorted(keys))
        return {key: json_clean(v) for key, v in zip(keys, obj.values())}

    if isinstance(obj, (set, frozenset)):
        # string hashing is salted per process
        obj = sorted(obj, key=repr)
    if isinstance(obj, (list, tuple, set, frozenset, types.GeneratorType)):
        return [json_clean(x) for x in obj]

    raise ValueError("Can't clean for JSON: %r" % obj)


def dumps(obj: Any) -> str:
    """Canonical artifact text: cleaned, sorted keys, two-space indent."""
    return json.dumps(json_clean(obj), sort_keys=True, indent=2) + "\n"
