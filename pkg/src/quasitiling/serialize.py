"""Canonical JSON dumps of windowed tilings.

Keys are sorted, coordinates are integer lists, rationals are ``"p/q"``
strings, and every list is in canonical order, so equal inputs give equal bytes.
"""

from __future__ import annotations

import json
from typing import Optional

from .errors import CorruptTiling, QuasitilingError
from .groups import FinSet, get_group
from .rationals import as_rational, fmt_rational
from .tiling import Quasitiling, WindowedTiling

DUMP_FORMAT = "quasitiling-dump/1"


class DumpError(QuasitilingError, ValueError):
    """The dump is unreadable or does not follow the schema."""


def dump_dict(wt: WindowedTiling, header: Optional[dict] = None,
              support: Optional[FinSet] = None) -> dict:
    T = wt.tiling
    tiles = []
    for k, c in T.keys():
        entry = {"shape": k, "center": list(c)}
        prov = T.provenance.get((k, c))
        if prov is not None:
            entry["level"], entry["stage"] = prov
        tiles.append(entry)
    return {
        "format": DUMP_FORMAT,
        "group": T.group.tag,
        "kind": wt.kind,
        "eps": None if wt.eps is None else fmt_rational(wt.eps),
        "anchored": T.anchored,
        "header": header or {},
        "window": [list(c) for c in wt.window.coords()],
        "shapes": [[list(c) for c in S.coords()] for S in T.shapes],
        "tiles": tiles,
        "support": None if support is None else [list(c) for c in support.coords()],
    }


def dumps(wt: WindowedTiling, header: Optional[dict] = None, support: Optional[FinSet] = None) -> str:
    return json.dumps(dump_dict(wt, header, support), sort_keys=True, separators=(",", ":")) + "\n"


def write_dump(path, wt: WindowedTiling, header: Optional[dict] = None,
               support: Optional[FinSet] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(wt, header, support))


def _coords(raw, rank: int, what: str) -> tuple:
    if not isinstance(raw, list) or len(raw) != rank or not all(isinstance(v, int) for v in raw):
        raise DumpError(f"bad {what} coordinates {raw!r}")
    return tuple(raw)


def from_dict(data: dict) -> tuple[WindowedTiling, dict]:
    """Rebuild the windowed tiling; returns it with the header.  Duplicated centers are corrupt tilings."""
    if not isinstance(data, dict) or data.get("format") != DUMP_FORMAT:
        raise DumpError(f"not a {DUMP_FORMAT} document")
    try:
        group = get_group(data["group"])
        rank = group.rank
        shapes = [FinSet(group, [_coords(c, rank, "shape") for c in S]) for S in data["shapes"]]
        window = FinSet(group, [_coords(c, rank, "window") for c in data["window"]])
        buckets = [[] for _ in shapes]
        prov = {}
        seen: dict = {}
        for entry in data["tiles"]:
            k = entry["shape"]
            if not isinstance(k, int) or not 0 <= k < len(shapes):
                raise CorruptTiling(f"tile refers to unknown shape {k!r}")
            c = _coords(entry["center"], rank, "center")
            if c in seen:
                raise CorruptTiling(f"center {c} appears twice (shapes {seen[c]} and {k})")
            seen[c] = k
            buckets[k].append(c)
            if "level" in entry:
                prov[(k, c)] = (entry["level"], entry["stage"])
        eps = None if data.get("eps") is None else as_rational(data["eps"])
        kind = data["kind"]
        anchored = bool(data.get("anchored", True))
        header = data.get("header") or {}
    except (KeyError, TypeError) as exc:
        raise DumpError(f"malformed dump: {exc!r}") from None
    T = Quasitiling(group, shapes, [FinSet(group, b) for b in buckets], prov, anchored=anchored)
    wt = WindowedTiling(T, window, kind=kind, eps=eps)
    if data.get("support") is not None:
        wt.meta["support"] = FinSet(group, [tuple(c) for c in data["support"]])
    return wt, header


def read_dump(path) -> tuple[WindowedTiling, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DumpError(f"cannot read dump {path}: {exc}") from None
    return from_dict(data)
