"""On-disk formats: state files, projector files, report serialization.

State files are JSON with amplitudes as 17-significant-digit decimal strings
plus hex-float companions, so a save/load round trip is bit-exact.  All
validation errors cite the offending field and raise
:class:`StateFileError`, which the CLI maps to exit code 2.
"""

from __future__ import annotations

import json
import math
import re as _re
from pathlib import Path
from typing import Any

from .state import MultiIndex, StateTensor, Subsystem, make_state
from .witness import Projector

__all__ = [
    "FORMAT_VERSION",
    "StateFileError",
    "save_state",
    "load_state",
    "save_projector",
    "load_projector",
    "canonical_report_json",
]

FORMAT_VERSION = "1.0"
_VERSION_PATTERN = _re.compile(r"^1\.\d+$")


class StateFileError(ValueError):
    """A state or projector file failed validation."""


def _fail(where: str, problem: str) -> "StateFileError":
    return StateFileError(f"{where}: {problem}")


def _check_version(obj: dict, where: str) -> None:
    version = obj.get("format_version")
    if version is None:
        raise _fail(where, "missing field 'format_version'")
    if not isinstance(version, str) or not _VERSION_PATTERN.match(version):
        raise _fail(
            where, f"unsupported format_version {version!r}; need '1.x' as a string"
        )


def _float_field(entry: dict, key: str, where: str) -> float:
    if key not in entry:
        raise _fail(where, f"missing field {key!r}")
    raw = entry[key]
    if isinstance(raw, bool) or not isinstance(raw, (str, int, float)):
        raise _fail(where, f"field {key!r} must be a decimal string or number")
    try:
        value = float(raw)
    except ValueError:
        raise _fail(where, f"field {key!r} is not a number: {raw!r}") from None
    hex_key = key + "_hex"
    if hex_key in entry:
        raw_hex = entry[hex_key]
        if not isinstance(raw_hex, str):
            raise _fail(where, f"field {hex_key!r} must be a hex-float string")
        try:
            exact = float.fromhex(raw_hex)
        except ValueError:
            raise _fail(where, f"field {hex_key!r} is not a hex float: {raw_hex!r}") from None
        if not (math.isfinite(exact) and math.isfinite(value)):
            raise _fail(where, f"field {key!r} must be finite")
        if abs(exact - value) > 1e-9 * max(1.0, abs(exact)):
            raise _fail(where, f"fields {key!r} and {hex_key!r} disagree")
        value = exact
    if not math.isfinite(value):
        raise _fail(where, f"field {key!r} must be finite")
    return value


def _state_to_json(v: StateTensor) -> dict:
    entries = []
    for idx, amp in v.items():
        entries.append(
            {
                "index": list(idx),
                "re": format(amp.real, ".17g"),
                "im": format(amp.imag, ".17g"),
                "re_hex": amp.real.hex(),
                "im_hex": amp.imag.hex(),
            }
        )
    return {
        "format_version": FORMAT_VERSION,
        "dims": list(v.dims),
        "truncated_from_infinite": v.truncated_from_infinite,
        "entries": entries,
        "metadata": v.metadata,
    }


def _state_from_json(obj: Any, where: str) -> StateTensor:
    if not isinstance(obj, dict):
        raise _fail(where, "top level must be a JSON object")
    _check_version(obj, where)

    dims = obj.get("dims")
    if dims is None:
        raise _fail(where, "missing field 'dims'")
    if not isinstance(dims, list) or not all(
        isinstance(d, int) and not isinstance(d, bool) for d in dims
    ):
        raise _fail(where, "field 'dims' must be a list of integers")

    raw_entries = obj.get("entries")
    if raw_entries is None:
        raise _fail(where, "missing field 'entries'")
    if not isinstance(raw_entries, list):
        raise _fail(where, "field 'entries' must be a list")

    truncated = obj.get("truncated_from_infinite", False)
    if not isinstance(truncated, bool):
        raise _fail(where, "field 'truncated_from_infinite' must be a boolean")

    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise _fail(where, "field 'metadata' must be an object")

    entries: dict[MultiIndex, complex] = {}
    for k, entry in enumerate(raw_entries):
        spot = f"{where}: entries[{k}]"
        if not isinstance(entry, dict):
            raise _fail(spot, "must be an object")
        index = entry.get("index")
        if not isinstance(index, list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in index
        ):
            raise _fail(spot, "field 'index' must be a list of integers")
        idx = tuple(index)
        if len(idx) != len(dims):
            raise _fail(spot, f"index {idx} has wrong length for dims {dims}")
        if any(i < 0 or i >= d for i, d in zip(idx, dims)):
            raise _fail(spot, f"index {idx} out of range for dims {dims}")
        if idx in entries:
            raise _fail(spot, f"duplicate index {idx}")
        re_val = _float_field(entry, "re", spot)
        im_val = _float_field(entry, "im", spot)
        entries[idx] = complex(re_val, im_val)

    try:
        return make_state(
            dims,
            entries,
            truncated_from_infinite=truncated,
            metadata=metadata,
        )
    except ValueError as exc:
        raise _fail(where, str(exc)) from None


def save_state(v: StateTensor, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(_state_to_json(v), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_state(path: str | Path) -> StateTensor:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(str(p), f"cannot read file ({exc})") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(str(p), f"invalid JSON ({exc})") from None
    return _state_from_json(obj, str(p))


def save_projector(p: Projector, path: str | Path) -> None:
    obj = {
        "format_version": FORMAT_VERSION,
        "subsystem": list(p.subsystem.indices),
        "vectors": [
            {"re": [x.real for x in row], "im": [x.imag for x in row]}
            for row in p.basis
        ],
    }
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_projector(path: str | Path) -> Projector:
    import numpy as np

    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise _fail(str(p), f"cannot read file ({exc})") from None
    except json.JSONDecodeError as exc:
        raise _fail(str(p), f"invalid JSON ({exc})") from None
    where = str(p)
    if not isinstance(obj, dict):
        raise _fail(where, "top level must be a JSON object")
    _check_version(obj, where)

    subsystem = obj.get("subsystem")
    if not isinstance(subsystem, list) or not all(
        isinstance(i, int) and not isinstance(i, bool) for i in subsystem
    ):
        raise _fail(where, "field 'subsystem' must be a list of integers")

    vectors = obj.get("vectors")
    if not isinstance(vectors, list) or not vectors:
        raise _fail(where, "field 'vectors' must be a nonempty list")
    rows = []
    width = None
    for k, vec in enumerate(vectors):
        spot = f"{where}: vectors[{k}]"
        if not isinstance(vec, dict):
            raise _fail(spot, "must be an object with 're' and 'im' lists")
        re_part = vec.get("re")
        im_part = vec.get("im")
        for name, part in (("re", re_part), ("im", im_part)):
            if not isinstance(part, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool)
                and math.isfinite(float(x))
                for x in part
            ):
                raise _fail(spot, f"field {name!r} must be a list of finite numbers")
        if len(re_part) != len(im_part):
            raise _fail(spot, "'re' and 'im' must have the same length")
        if width is None:
            width = len(re_part)
        elif len(re_part) != width:
            raise _fail(spot, "all vectors must have the same length")
        rows.append([complex(r, i) for r, i in zip(re_part, im_part)])

    try:
        return Projector(
            subsystem=Subsystem.coerce(subsystem), basis=np.array(rows)
        )
    except ValueError as exc:
        raise _fail(where, str(exc)) from None


def canonical_report_json(report: dict) -> str:
    """Deterministic rendering used for all CLI reports."""
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
