"""Cage text files, OBJ meshes and binary coordinate tables.

Cage files are JSON::

    {"format": "bezier-cage", "version": 1, "patches": [
        {"kind": "tensor", "degree": [3, 3], "points": [[x, y, z], ...]},
        {"kind": "triangle", "degree": 3, "points": [...], "name": "lid"}]}

Tensor points are listed i-major (b_00, b_01, ...), triangle points in
lexicographic (i, j) order. :func:`write_cage` produces the canonical text:
one point per line, floats in shortest round-trip form.

Coordinate files start with the magic bytes ``BZCOORD\\0``, a little-endian
uint32 version and a uint32 header length, then a JSON header and the body:
per vertex, all phi weights followed by all psi weights, as little-endian
float64.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .cage import Cage, EmbeddedMesh, TensorPatch, TrianglePatch, require_valid
from .coordinates import CoordinateTable, PatchLayout
from .errors import BezcageError, FormatError, MeshError, StaleCoordinatesError

CAGE_FORMAT = "bezier-cage"
CAGE_VERSION = 1
LOOPS_FORMAT = "coons-loops"

COORD_MAGIC = b"BZCOORD\x00"
COORD_VERSION = 1
_PREFIX = struct.Struct("<8sII")

_PATCH_KEYS = {"kind", "degree", "points", "name"}


def _load_json(text, what):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{what}: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{what}: top level must be an object")
    return doc


def _check_header(doc, fmt, keys):
    extra = set(doc) - keys
    if extra:
        raise FormatError(f"unknown top-level fields {sorted(extra)}")
    if doc.get("format") != fmt:
        raise FormatError(f"expected format {fmt!r}, got {doc.get('format')!r}")
    if doc.get("version") != CAGE_VERSION:
        raise FormatError(f"unsupported version {doc.get('version')!r}")


def _points(raw, label):
    if not isinstance(raw, list):
        raise FormatError(f"{label}: points must be a list of [x, y, z]")
    for p in raw:
        if (
            not isinstance(p, list)
            or len(p) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in p)
        ):
            raise FormatError(f"{label}: every point must be [x, y, z] numbers, got {p!r}")
    return np.array(raw, dtype=np.float64).reshape(-1, 3)


def _parse_patch(entry, k):
    label = f"patch {k}"
    if not isinstance(entry, dict):
        raise FormatError(f"{label}: must be an object")
    extra = set(entry) - _PATCH_KEYS
    if extra:
        raise FormatError(f"{label}: unknown fields {sorted(extra)}")
    name = entry.get("name")
    if name is not None:
        if not isinstance(name, str):
            raise FormatError(f"{label}: name must be a string")
        label = f"patch {k} ({name!r})"
    pts = _points(entry.get("points"), label)
    kind, deg = entry.get("kind"), entry.get("degree")
    if kind == "tensor":
        if not (isinstance(deg, list) and len(deg) == 2 and all(type(d) is int for d in deg)):
            raise FormatError(f"{label}: tensor degree must be [m, n]")
        m, n = deg
        want = (m + 1) * (n + 1)
        if len(pts) != want:
            raise FormatError(f"{label}: degree ({m},{n}) needs {want} points, got {len(pts)}")
        return TensorPatch(m, n, pts), name
    if kind == "triangle":
        if type(deg) is not int:
            raise FormatError(f"{label}: triangle degree must be an integer")
        want = (deg + 1) * (deg + 2) // 2
        if len(pts) != want:
            raise FormatError(f"{label}: triangle degree {deg} needs {want} points, got {len(pts)}")
        return TrianglePatch(deg, pts), name
    raise FormatError(f"{label}: kind must be 'tensor' or 'triangle', got {kind!r}")


def parse_cage(text, validate: bool = True) -> Cage:
    """Parse cage JSON text into a :class:`Cage`.

    Raises :class:`FormatError` for schema violations and, with ``validate``,
    :class:`CageError` when the cage is not watertight and outward-facing.
    """
    doc = _load_json(text, "cage file")
    _check_header(doc, CAGE_FORMAT, {"format", "version", "patches"})
    entries = doc.get("patches")
    if not isinstance(entries, list) or not entries:
        raise FormatError("'patches' must be a non-empty list")
    parsed = [_parse_patch(e, k) for k, e in enumerate(entries)]
    names = tuple(n for _, n in parsed)
    cage = Cage(tuple(p for p, _ in parsed), names=names if any(n is not None for n in names) else ())
    if validate:
        require_valid(cage)
    return cage


def _fmt_point(p):
    return "[" + ", ".join(repr(float(c)) for c in p) + "]"


def write_cage(cage: Cage) -> str:
    """Canonical cage text. ``write_cage(parse_cage(t)) == t`` for canonical t."""
    blocks = []
    names = cage.names or (None,) * len(cage)
    for patch, name in zip(cage.patches, names):
        deg = f"[{patch.degree_u}, {patch.degree_v}]" if patch.kind == "tensor" else str(patch.degree)
        head = f'    {{"kind": "{patch.kind}", "degree": {deg},'
        if name is not None:
            head += f" \"name\": {json.dumps(name)},"
        pts = ",\n".join("      " + _fmt_point(p) for p in patch.control_points)
        blocks.append(f'{head}\n     "points": [\n{pts}\n     ]}}')
    body = ",\n".join(blocks)
    return f'{{"format": "{CAGE_FORMAT}", "version": {CAGE_VERSION}, "patches": [\n{body}\n]}}\n'


def load_cage(path, validate: bool = True) -> Cage:
    return parse_cage(Path(path).read_text(), validate)


def save_cage(path, cage: Cage) -> None:
    Path(path).write_text(write_cage(cage))


def cage_hash(cage: Cage) -> str:
    return hashlib.sha256(write_cage(cage).encode()).hexdigest()


# ---------------------------------------------------------------------------
# Boundary loops and quads


def parse_loops(text) -> list:
    """Boundary loops for Coons filling.

    ``{"format": "coons-loops", "version": 1, "loops": [{"u0": [...],
    "u1": [...], "v0": [...], "v1": [...]}, ...]}`` where u0 = s(0, v),
    u1 = s(1, v), v0 = s(u, 0) and v1 = s(u, 1).
    """
    from .coons import BoundaryLoop

    doc = _load_json(text, "loops file")
    _check_header(doc, LOOPS_FORMAT, {"format", "version", "loops"})
    loops = doc.get("loops")
    if not isinstance(loops, list) or not loops:
        raise FormatError("'loops' must be a non-empty list")
    out = []
    for k, entry in enumerate(loops):
        if not isinstance(entry, dict) or set(entry) != {"u0", "u1", "v0", "v1"}:
            raise FormatError(f"loop {k}: needs exactly the fields u0, u1, v0, v1")
        out.append(BoundaryLoop(*(_points(entry[key], f"loop {k} {key}") for key in ("u0", "u1", "v0", "v1"))))
    return out


# ---------------------------------------------------------------------------
# OBJ


def _obj_index(tok, n, lineno):
    # negative indices count back from the vertices read so far
    try:
        i = int(tok.split("/")[0])
    except ValueError:
        raise MeshError(f"line {lineno}: bad face index {tok!r}") from None
    if i == 0 or n + i < 0:
        raise MeshError(f"line {lineno}: face index {i} out of range")
    return i - 1 if i > 0 else n + i


def read_obj_polygons(source):
    """Vertices (V, 3) and the list of polygon index lists (0-based)."""
    text = Path(source).read_text() if not hasattr(source, "read") else source.read()
    verts, faces, lines = [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: vertex needs three coordinates")
            try:
                verts.append([float(c) for c in parts[1:4]])
            except ValueError:
                raise MeshError(f"line {lineno}: bad vertex {line.strip()!r}") from None
        elif tag == "f":
            if len(parts) < 4:
                raise MeshError(f"line {lineno}: face needs at least three vertices")
            faces.append([_obj_index(t, len(verts), lineno) for t in parts[1:]])
            lines.append(lineno)
    for poly, lineno in zip(faces, lines):
        if max(poly) >= len(verts):
            raise MeshError(f"line {lineno}: face index {max(poly) + 1} out of range for {len(verts)} vertices")
    return np.array(verts, dtype=np.float64).reshape(-1, 3), faces


def read_mesh(source) -> EmbeddedMesh:
    """Read v/f records of an OBJ file; polygons are fan-triangulated."""
    verts, polys = read_obj_polygons(source)
    tris = [(p[0], p[t], p[t + 1]) for p in polys for t in range(1, len(p) - 1)]
    return EmbeddedMesh(verts, np.array(tris, dtype=np.int64).reshape(-1, 3))


def write_mesh(path, mesh: EmbeddedMesh) -> None:
    lines = ["v %.17g %.17g %.17g" % tuple(v) for v in mesh.vertices]
    lines += ["f %d %d %d" % tuple(f + 1) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def read_quads(source) -> np.ndarray:
    """(Q, 4, 3) quad corners from an OBJ file made of 4-sided faces."""
    verts, polys = read_obj_polygons(source)
    bad = [k for k, p in enumerate(polys) if len(p) != 4]
    if bad:
        raise MeshError(f"faces {bad[:10]} are not quads")
    return verts[np.array(polys, dtype=np.int64).reshape(-1, 4)]


def mesh_hash(vertices) -> str:
    v = np.ascontiguousarray(np.asarray(vertices, dtype="<f8").reshape(-1, 3))
    return hashlib.sha256(v.tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# Coordinate tables


def save_coordinates(path, table: CoordinateTable, cage: Cage, vertices) -> None:
    header = {
        "cage_sha256": cage_hash(cage),
        "mesh_sha256": mesh_hash(vertices),
        "variant": table.variant,
        "grid": table.grid,
        "levels": table.levels,
        "projected": bool(table.projected),
        "vertices": len(table),
        "layout": [
            {"kind": p.kind, "degree": list(p.degrees), "n_phi": p.n_phi, "n_psi": p.n_psi} for p in table.layout
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode()
    body = np.ascontiguousarray(table.stacked(), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(COORD_MAGIC, COORD_VERSION, len(blob)))
        fh.write(blob)
        fh.write(body.tobytes())


def load_coordinates(path, cage: Cage | None = None, vertices=None) -> CoordinateTable:
    """Read a coordinate file, checking it against ``cage`` and ``vertices`` if given.

    A hash mismatch raises :class:`StaleCoordinatesError`.
    """
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise FormatError(f"{path}: too short for a coordinate file")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != COORD_MAGIC:
        raise FormatError(f"{path}: not a coordinate file (bad magic bytes)")
    if version != COORD_VERSION:
        raise FormatError(f"{path}: unsupported coordinate file version {version}")
    try:
        header = json.loads(data[_PREFIX.size : _PREFIX.size + hlen])
        layout = tuple(PatchLayout(e["kind"], tuple(e["degree"]), e["n_phi"], e["n_psi"]) for e in header["layout"])
        nv = int(header["vertices"])
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}: bad header ({exc})") from None
    n_phi = sum(p.n_phi for p in layout)
    width = n_phi + sum(p.n_psi for p in layout)
    body = data[_PREFIX.size + hlen :]
    if len(body) != nv * width * 8:
        raise FormatError(f"{path}: body has {len(body)} bytes, header implies {nv * width * 8}")
    values = np.frombuffer(body, dtype="<f8").reshape(nv, width).astype(np.float64)
    if cage is not None and cage_hash(cage) != header["cage_sha256"]:
        raise StaleCoordinatesError(f"{path} was computed for a different cage")
    if vertices is not None and mesh_hash(vertices) != header["mesh_sha256"]:
        raise StaleCoordinatesError(f"{path} was computed for a different mesh")
    return CoordinateTable(
        phi=values[:, :n_phi].copy(),
        psi=values[:, n_phi:].copy(),
        variant=header["variant"],
        grid=int(header["grid"]),
        levels=int(header["levels"]),
        projected=bool(header["projected"]),
        layout=layout,
    )


__all__ = [
    "BezcageError",
    "cage_hash",
    "load_cage",
    "load_coordinates",
    "mesh_hash",
    "parse_cage",
    "parse_loops",
    "read_mesh",
    "read_obj_polygons",
    "read_quads",
    "save_cage",
    "save_coordinates",
    "write_cage",
    "write_mesh",
]
