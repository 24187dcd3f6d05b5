"""Readers and writers for distance matrices, meshes, loops and maps.

Formats
-------
distance text
    First non-comment line ``n``, then ``n`` rows of ``n`` numbers.  ``#``
    starts a comment.
distance JSON
    ``{"labels": [...], "dist": [[...], ...]}``; ``labels`` is optional.
mesh (OFF style)
    Optional ``OFF`` header line, then ``nv nf [ne]``, ``nv`` coordinate
    rows (2 or 3 numbers), ``nf`` face rows ``3 a b c``.
mesh JSON
    ``{"triangles": [[a, b, c], ...], "edge_lengths": [[i, j, l], ...],
    "coords": [[x, y], ...]}``; lengths, coordinates or both.
loop JSON
    ``[[angle, point], ...]`` or ``{"points": [...], "angles": [...],
    "total_length": L}``.  Without ``total_length`` the length is the sum of
    base distances between consecutive samples.
map JSON
    ``{"source_mesh": path, "target": path | "euclidean",
    "assignment": [...]}``; relative paths are resolved against the map
    file's directory.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .disc_mesh import SampledLoop, TriDiscMesh
from .intrinsic_disc import PLMap
from .metric_core import FiniteMetricSpace

__all__ = [
    "InputError",
    "dump_json",
    "is_mesh_file",
    "read_distance",
    "read_loop",
    "read_map",
    "read_mesh",
    "write_distance_json",
    "write_distance_text",
    "write_mesh_json",
    "write_mesh_off",
]


class InputError(ValueError):
    """Unreadable input; carries the file and, when known, the line number."""

    def __init__(self, path, message, line=None):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(path, f"cannot read file ({e.strerror or e})") from e


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise InputError(path, f"invalid JSON: {e.msg}", e.lineno) from e


def _content_lines(text):
    """(line number, tokens) for non-empty lines with comments removed."""
    for k, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].split()
        if body:
            yield k, body


def _floats(path, line, tokens):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise InputError(path, f"expected numbers, got {' '.join(tokens)!r}", line) from None


def _ints(path, line, tokens):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InputError(path, f"expected integers, got {' '.join(tokens)!r}", line) from None


# ---------------------------------------------------------------------- distances


def read_distance(path) -> FiniteMetricSpace:
    """Distance matrix from a ``.json`` file or the text format."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        obj = _read_json(path)
        if not isinstance(obj, dict) or "dist" not in obj:
            raise InputError(path, 'expected an object with a "dist" matrix')
        try:
            d = np.array(obj["dist"], dtype=float)
        except (TypeError, ValueError) as e:
            raise InputError(path, f"bad distance matrix: {e}") from e
        labels = obj.get("labels")
    else:
        rows = list(_content_lines(_read_text(path)))
        if not rows:
            raise InputError(path, "empty file")
        line, tok = rows[0]
        if len(tok) != 1:
            raise InputError(path, "first line must hold the point count", line)
        n = _ints(path, line, tok)[0]
        if len(rows) - 1 != n:
            raise InputError(path, f"expected {n} matrix rows, found {len(rows) - 1}")
        d = np.empty((n, n))
        for k, (line, tok) in enumerate(rows[1:]):
            if len(tok) != n:
                raise InputError(path, f"row has {len(tok)} entries, expected {n}", line)
            d[k] = _floats(path, line, tok)
        labels = None
    try:
        return FiniteMetricSpace(d, labels)
    except ValueError as e:
        raise InputError(path, str(e)) from e


def write_distance_json(space: FiniteMetricSpace, path):
    Path(path).write_text(dump_json({"labels": list(space.labels), "dist": space.dist.tolist()}))


def write_distance_text(space: FiniteMetricSpace, path):
    lines = [str(len(space))] + [" ".join(repr(float(v)) for v in row) for row in space.dist]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------- meshes


def _mesh_or_input_error(path, **kw):
    try:
        return TriDiscMesh(**kw)
    except ValueError as e:
        raise InputError(path, str(e)) from e


def read_mesh(path) -> TriDiscMesh:
    path = Path(path)
    if path.suffix.lower() == ".json":
        obj = _read_json(path)
        if not isinstance(obj, dict) or "triangles" not in obj:
            raise InputError(path, 'expected an object with "triangles"')
        lengths = None
        if "edge_lengths" in obj:
            try:
                lengths = {(int(i), int(j)): float(w) for i, j, w in obj["edge_lengths"]}
            except (TypeError, ValueError) as e:
                raise InputError(path, f"edge_lengths must be [i, j, length] triples ({e})") from e
        coords = np.array(obj["coords"], dtype=float) if "coords" in obj else None
        return _mesh_or_input_error(path, triangles=obj["triangles"], edge_lengths=lengths, coords=coords)

    rows = list(_content_lines(_read_text(path)))
    if rows and rows[0][1][0].upper() == "OFF":
        head = rows.pop(0)
        if len(head[1]) > 1:
            rows.insert(0, (head[0], head[1][1:]))
    if not rows:
        raise InputError(path, "empty mesh file")
    line, tok = rows[0]
    counts = _ints(path, line, tok)
    if len(counts) not in (2, 3):
        raise InputError(path, "expected 'n_vertices n_faces [n_edges]'", line)
    nv, nf = counts[:2]
    if len(rows) < 1 + nv + nf:
        raise InputError(path, f"expected {nv} vertex and {nf} face rows, file ends early")
    coords = []
    for line, tok in rows[1 : 1 + nv]:
        xs = _floats(path, line, tok)
        if len(xs) not in (2, 3):
            raise InputError(path, f"vertex row needs 2 or 3 coordinates, got {len(xs)}", line)
        coords.append(xs)
    if len({len(c) for c in coords}) > 1:
        raise InputError(path, "vertex rows mix 2 and 3 coordinates")
    tris = []
    for line, tok in rows[1 + nv : 1 + nv + nf]:
        f = _ints(path, line, tok)
        if len(f) == 4 and f[0] == 3:
            f = f[1:]
        if len(f) != 3:
            raise InputError(path, "face row must be '3 a b c' or 'a b c'", line)
        if min(f) < 0 or max(f) >= nv:
            raise InputError(path, f"face references vertex outside 0..{nv - 1}", line)
        tris.append(f)
    if len(rows) > 1 + nv + nf:
        raise InputError(path, "unexpected trailing content", rows[1 + nv + nf][0])
    return _mesh_or_input_error(path, triangles=tris, coords=np.array(coords))


def write_mesh_json(m: TriDiscMesh, path):
    obj = {
        "triangles": m.triangles.tolist(),
        "edge_lengths": [[int(a), int(b), float(w)] for (a, b), w in zip(m.edges.tolist(), m.lengths)],
    }
    if m.coords is not None:
        obj["coords"] = m.coords.tolist()
    Path(path).write_text(dump_json(obj))


def write_mesh_off(m: TriDiscMesh, path):
    if m.coords is None:
        raise ValueError("OFF output needs vertex coordinates")
    lines = ["OFF", f"{m.n_vertices} {m.n_triangles} {len(m.edges)}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in m.coords]
    lines += ["3 " + " ".join(str(int(v)) for v in t) for t in m.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------- loops and maps


def read_loop(path, base: FiniteMetricSpace | None = None) -> SampledLoop:
    obj = _read_json(path)
    try:
        if isinstance(obj, list):
            obj = {"angles": [p[0] for p in obj], "points": [p[1] for p in obj]}
        pts = obj["points"]
        if base is not None and not all(isinstance(p, int) for p in pts):
            pts = [base.index(p) for p in pts]
        pts = np.array(pts, int)
        if "total_length" in obj:
            L = float(obj["total_length"])
        elif base is not None:
            L = float(base.dist[pts, np.roll(pts, -1)].sum())
        else:
            raise KeyError("total_length")
        return SampledLoop(np.array(obj["angles"], float), pts, L)
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise InputError(path, f"bad loop: {e!r}") from e


def is_mesh_file(path) -> bool:
    """Mesh (OFF or JSON with triangles) rather than a distance file."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        return True
    if suffix == ".json":
        obj = _read_json(path)
        return isinstance(obj, dict) and "triangles" in obj
    return False


def read_map(path) -> PLMap:
    path = Path(path)
    obj = _read_json(path)
    for key in ("source_mesh", "target", "assignment"):
        if key not in obj:
            raise InputError(path, f'missing "{key}"')
    base = path.parent
    src = read_mesh(base / obj["source_mesh"])
    tgt_mesh = None
    if obj["target"] == "euclidean":
        target = None
    else:
        tpath = base / obj["target"]
        if is_mesh_file(tpath):
            from .disc_mesh import vertex_metric

            tgt_mesh = read_mesh(tpath)
            target = vertex_metric(tgt_mesh)
        else:
            target = read_distance(tpath)
    try:
        return PLMap(src, target, obj["assignment"], target_mesh=tgt_mesh)
    except ValueError as e:
        raise InputError(path, str(e)) from e


# ---------------------------------------------------------------------- JSON output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dump_json(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
