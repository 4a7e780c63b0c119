"""Text formats for forms, points, lines, pencils, and certificates.

Everything is UTF-8 JSON built from exact scalar serializations: rationals
as "p/q" strings, extension elements as nested {a, b, rad} objects, and a
radicand list in adjunction order as the context header of every document.
Writers emit canonical text (sorted keys, fixed indentation) so identical
inputs give byte-identical files; parsers reject anything that would not
round-trip, which is what makes certificates auditable by diff.

A parser takes an optional base tower.  When given, the document's
radicand list must extend the base's list prefix-exactly, so a point or a
certificate is always interpreted in a field compatible with the form or
pencil file it accompanies.
"""

import json

from .errors import InputFormatError, TowerError
from .navigate import MovePath, MoveStep
from .pencils import Line, LineChart, Pencil, XPath, XSegment
from .projective import LinearSubspace, ProjPoint, QuadForm, mat_eq, vec
from .tower import (
    DEFAULT_TOWER_LIMIT, Tower, scalar_from_obj, scalar_to_obj,
    tower_from_obj, tower_to_obj,
)

FORMAT_VERSION = 1


def dumps(obj) -> str:
    """Canonical document text: sorted keys, two-space indent, newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError("not valid JSON: %s" % exc) from None


def _require(obj, key, kind):
    if not isinstance(obj, dict):
        raise InputFormatError("%s document must be an object" % kind)
    if key not in obj:
        raise InputFormatError("%s document is missing %r" % (kind, key))
    return obj[key]


def _check_kind(obj, kind):
    got = _require(obj, "kind", kind)
    if got != kind:
        raise InputFormatError("expected a %s document, got %r" % (kind, got))


def _size_of(obj, kind) -> int:
    n = _require(obj, "size", kind)
    if not isinstance(n, int) or n < 1:
        raise InputFormatError("%s size must be a positive integer" % kind)
    return n


def _tower_of(obj, kind, base, limit) -> Tower:
    rads = obj.get("radicands", [])
    if not isinstance(rads, list):
        raise InputFormatError("%s radicand header must be a list" % kind)
    return tower_from_obj(rads, limit, base=base)


def _coords_to_obj(coords) -> list:
    return [scalar_to_obj(c) for c in coords]


def _coords_from_obj(objs, tower, what):
    if not isinstance(objs, list) or not objs:
        raise InputFormatError("%s must be a nonempty list" % what)
    return vec(scalar_from_obj(c, tower) for c in objs)


def _point_to_obj(p: ProjPoint) -> list:
    return _coords_to_obj(p.canonical_coords())


def _point_from_obj(objs, tower, size, what) -> ProjPoint:
    cs = _coords_from_obj(objs, tower, what)
    if len(cs) != size:
        raise InputFormatError(
            "%s has %d coordinates, expected %d" % (what, len(cs), size))
    try:
        return ProjPoint(cs)
    except TowerError:
        raise InputFormatError("%s is the zero vector" % what) from None


def _matrix_to_flat(rows) -> list:
    return [scalar_to_obj(c) for row in rows for c in row]


def _matrix_from_flat(objs, tower, size, what):
    if not isinstance(objs, list) or len(objs) != size * size:
        raise InputFormatError(
            "%s must hold %d row-major entries" % (what, size * size))
    cells = [scalar_from_obj(c, tower) for c in objs]
    return tuple(tuple(cells[i * size:(i + 1) * size]) for i in range(size))


# ---------------------------------------------------------------------------
# forms, points, subspaces


def form_to_obj(form: QuadForm, tower: Tower) -> dict:
    return {
        "kind": "form",
        "size": form.size,
        "radicands": tower_to_obj(tower),
        "matrix": _matrix_to_flat(form.matrix),
    }


def form_from_obj(obj, base: Tower | None = None,
                  limit: int = DEFAULT_TOWER_LIMIT):
    """Parse a form document into (QuadForm, tower)."""
    _check_kind(obj, "form")
    size = _size_of(obj, "form")
    tower = _tower_of(obj, "form", base, limit)
    rows = _matrix_from_flat(_require(obj, "matrix", "form"),
                             tower, size, "form matrix")
    try:
        return QuadForm(rows), tower
    except TowerError as exc:
        raise InputFormatError("bad form matrix: %s" % exc) from None


def point_to_obj(p: ProjPoint, tower: Tower) -> dict:
    return {
        "kind": "point",
        "size": len(p.coords),
        "radicands": tower_to_obj(tower),
        "coords": _point_to_obj(p),
    }


def point_from_obj(obj, base: Tower | None = None,
                   limit: int = DEFAULT_TOWER_LIMIT):
    _check_kind(obj, "point")
    size = _size_of(obj, "point")
    tower = _tower_of(obj, "point", base, limit)
    pt = _point_from_obj(_require(obj, "coords", "point"),
                         tower, size, "point")
    return pt, tower


def subspace_to_obj(sub: LinearSubspace, tower: Tower,
                    style: str = "span") -> dict:
    obj = {
        "kind": "subspace",
        "size": sub.ambient,
        "radicands": tower_to_obj(tower),
    }
    if style == "span":
        obj["span"] = [_coords_to_obj(v) for v in sub.span_basis()]
    elif style == "equations":
        obj["equations"] = [_coords_to_obj(v) for v in sub.equations()]
    else:
        raise InputFormatError("subspace style must be span or equations")
    return obj


def subspace_from_obj(obj, base: Tower | None = None,
                      limit: int = DEFAULT_TOWER_LIMIT):
    _check_kind(obj, "subspace")
    size = _size_of(obj, "subspace")
    tower = _tower_of(obj, "subspace", base, limit)
    has_span = "span" in obj
    has_eqs = "equations" in obj
    if has_span == has_eqs:
        raise InputFormatError(
            "subspace needs exactly one of span or equations")
    rows = obj["span"] if has_span else obj["equations"]
    if not isinstance(rows, list) or not rows:
        raise InputFormatError("subspace block must be a nonempty list")
    vecs = []
    for r in rows:
        v = _coords_from_obj(r, tower, "subspace row")
        if len(v) != size:
            raise InputFormatError("subspace row has the wrong length")
        vecs.append(v)
    if has_span:
        return LinearSubspace.from_span(vecs, size), tower
    return LinearSubspace.from_equations(vecs, size), tower


# ---------------------------------------------------------------------------
# pencils and lines


def pencil_to_obj(p: Pencil, tower: Tower) -> dict:
    return {
        "kind": "pencil",
        "size": p.size,
        "radicands": tower_to_obj(tower),
        "beta": _matrix_to_flat(p.beta.matrix),
        "gamma": _matrix_to_flat(p.gamma.matrix),
    }


def pencil_from_obj(obj, base: Tower | None = None,
                    limit: int = DEFAULT_TOWER_LIMIT):
    _check_kind(obj, "pencil")
    size = _size_of(obj, "pencil")
    tower = _tower_of(obj, "pencil", base, limit)
    b = _matrix_from_flat(_require(obj, "beta", "pencil"),
                          tower, size, "first pencil matrix")
    g = _matrix_from_flat(_require(obj, "gamma", "pencil"),
                          tower, size, "second pencil matrix")
    try:
        return Pencil(QuadForm(b), QuadForm(g)), tower
    except (TowerError, InputFormatError) as exc:
        raise InputFormatError("bad pencil: %s" % exc) from None


def line_to_obj(line: Line, tower: Tower) -> dict:
    return {
        "kind": "line",
        "size": len(line.v1),
        "radicands": tower_to_obj(tower),
        "v1": _coords_to_obj(line.v1),
        "v2": _coords_to_obj(line.v2),
    }


def line_from_obj(obj, base: Tower | None = None,
                  limit: int = DEFAULT_TOWER_LIMIT):
    """Parse a line document into (Line, tower).

    Only the text format is checked here; whether the span really lies
    inside a given intersection is a question about a pencil, so callers
    revalidate with Line.through against the pencil they pair it with.
    """
    _check_kind(obj, "line")
    size = _size_of(obj, "line")
    tower = _tower_of(obj, "line", base, limit)
    v1 = _point_from_obj(_require(obj, "v1", "line"), tower, size,
                         "first spanning point")
    v2 = _point_from_obj(_require(obj, "v2", "line"), tower, size,
                         "second spanning point")
    return Line(v1.coords, v2.coords), tower


# ---------------------------------------------------------------------------
# move certificates

_PROBLEMS = ("complement", "quadric")


def _descriptor_to_obj(desc: dict) -> dict:
    out = dict(desc)
    rows = desc["matrix"]
    out["matrix"] = _matrix_to_flat(rows)
    out["size"] = len(rows)
    return out


def _descriptor_from_obj(obj, tower) -> dict:
    if not isinstance(obj, dict):
        raise InputFormatError("chart descriptor must be an object")
    size = _size_of(obj, "chart descriptor")
    desc = {k: v for k, v in obj.items() if k != "size"}
    desc["matrix"] = [list(row) for row in _matrix_from_flat(
        _require(obj, "matrix", "chart descriptor"), tower, size,
        "chart matrix")]
    return desc


def _step_to_obj(step: MoveStep) -> dict:
    return {
        "chart": _descriptor_to_obj(step.chart),
        "entry": _point_to_obj(step.entry),
        "target": _coords_to_obj(step.target),
        "exit": _point_to_obj(step.exit),
    }


def _step_from_obj(obj, tower, size) -> MoveStep:
    chart = _descriptor_from_obj(_require(obj, "chart", "step"), tower)
    entry = _point_from_obj(_require(obj, "entry", "step"), tower, size,
                            "step entry")
    exit_p = _point_from_obj(_require(obj, "exit", "step"), tower, size,
                             "step exit")
    target = _require(obj, "target", "step")
    if not isinstance(target, list):
        raise InputFormatError("step target must be a list")
    return MoveStep(chart, entry,
                    tuple(scalar_from_obj(c, tower) for c in target), exit_p)


def path_to_obj(path: MovePath) -> dict:
    return {
        "kind": "certificate",
        "version": FORMAT_VERSION,
        "problem": path.problem,
        "size": path.form.size,
        "radicands": tower_to_obj(path.tower),
        "seed": path.seed,
        "form": _matrix_to_flat(path.form.matrix),
        "from": _point_to_obj(path.start),
        "to": _point_to_obj(path.end),
        "steps": [_step_to_obj(s) for s in path.steps],
    }


def _cert_header(obj, problems):
    _check_kind(obj, "certificate")
    version = _require(obj, "version", "certificate")
    if version != FORMAT_VERSION:
        raise InputFormatError(
            "unsupported certificate version %r" % version)
    problem = _require(obj, "problem", "certificate")
    if problem not in problems:
        raise InputFormatError("unknown problem kind %r" % problem)
    return problem, _size_of(obj, "certificate")


def path_from_obj(obj, base: Tower | None = None,
                  limit: int = DEFAULT_TOWER_LIMIT) -> MovePath:
    """Parse a fiber-move certificate.  The scalars are interpreted in the
    tower named by the radicand header, which must extend base when one is
    given; nothing about the moves themselves is checked here, that is
    verify_path's job."""
    problem, size = _cert_header(obj, _PROBLEMS)
    tower = _tower_of(obj, "certificate", base, limit)
    rows = _matrix_from_flat(_require(obj, "form", "certificate"),
                             tower, size, "certificate form")
    try:
        form = QuadForm(rows)
    except TowerError as exc:
        raise InputFormatError("bad certificate form: %s" % exc) from None
    start = _point_from_obj(_require(obj, "from", "certificate"),
                            tower, size, "start point")
    end = _point_from_obj(_require(obj, "to", "certificate"),
                          tower, size, "end point")
    steps = _require(obj, "steps", "certificate")
    if not isinstance(steps, list):
        raise InputFormatError("certificate steps must be a list")
    seed = obj.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise InputFormatError("certificate seed must be an integer")
    parsed = tuple(_step_from_obj(s, tower, size) for s in steps)
    return MovePath(problem, form, start, end, parsed, tower, seed)


# ---------------------------------------------------------------------------
# intersection certificates: the same format plus a chart wrapper per leg


def _segment_to_obj(seg: XSegment, pencil: Pencil) -> dict:
    chart = LineChart(pencil, seg.line)
    return {
        "line": {
            "v1": _coords_to_obj(seg.line.v1),
            "v2": _coords_to_obj(seg.line.v2),
        },
        "change": _matrix_to_flat(chart.change.matrix),
        "image": _matrix_to_flat(chart.image.matrix),
        "from": _point_to_obj(seg.start),
        "to": _point_to_obj(seg.end),
        "inner": path_to_obj(seg.inner),
    }


def _segment_from_obj(obj, tower, size, base, limit) -> XSegment:
    if not isinstance(obj, dict):
        raise InputFormatError("segment must be an object")
    line_obj = _require(obj, "line", "segment")
    v1 = _point_from_obj(_require(line_obj, "v1", "segment line"),
                         tower, size, "first spanning point")
    v2 = _point_from_obj(_require(line_obj, "v2", "segment line"),
                         tower, size, "second spanning point")
    start = _point_from_obj(_require(obj, "from", "segment"), tower, size,
                            "segment start")
    end = _point_from_obj(_require(obj, "to", "segment"), tower, size,
                          "segment end")
    inner = path_from_obj(_require(obj, "inner", "segment"), base, limit)
    if inner.problem != "complement":
        raise InputFormatError("segment inner certificate has kind %r"
                               % inner.problem)
    if inner.form.size != size - 2:
        raise InputFormatError("segment inner certificate has size %d, "
                               "expected %d" % (inner.form.size, size - 2))
    # the wrapper repeats the adapted change and the image quadric so a
    # reader can audit the file without rebuilding the chart; they must at
    # least agree with the inner certificate internally
    _matrix_from_flat(_require(obj, "change", "segment"), tower, size,
                      "segment change")
    image = _matrix_from_flat(_require(obj, "image", "segment"), tower,
                              size - 2, "segment image")
    if not mat_eq(image, inner.form.matrix):
        raise InputFormatError(
            "segment image quadric disagrees with the inner form")
    return XSegment(Line(v1.coords, v2.coords), start, end, inner)


def xpath_to_obj(path: XPath) -> dict:
    return {
        "kind": "certificate",
        "version": FORMAT_VERSION,
        "problem": "ci",
        "size": path.pencil.size,
        "radicands": tower_to_obj(path.tower),
        "seed": path.seed,
        "beta": _matrix_to_flat(path.pencil.beta.matrix),
        "gamma": _matrix_to_flat(path.pencil.gamma.matrix),
        "from": _point_to_obj(path.start),
        "to": _point_to_obj(path.end),
        "segments": [_segment_to_obj(s, path.pencil)
                     for s in path.segments],
    }


def xpath_from_obj(obj, base: Tower | None = None,
                   limit: int = DEFAULT_TOWER_LIMIT) -> XPath:
    _, size = _cert_header(obj, ("ci",))
    tower = _tower_of(obj, "certificate", base, limit)
    b = _matrix_from_flat(_require(obj, "beta", "certificate"),
                          tower, size, "first pencil matrix")
    g = _matrix_from_flat(_require(obj, "gamma", "certificate"),
                          tower, size, "second pencil matrix")
    try:
        pencil = Pencil(QuadForm(b), QuadForm(g))
    except (TowerError, InputFormatError) as exc:
        raise InputFormatError("bad certificate pencil: %s" % exc) from None
    start = _point_from_obj(_require(obj, "from", "certificate"),
                            tower, size, "start point")
    end = _point_from_obj(_require(obj, "to", "certificate"),
                          tower, size, "end point")
    segs = _require(obj, "segments", "certificate")
    if not isinstance(segs, list):
        raise InputFormatError("certificate segments must be a list")
    seed = obj.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise InputFormatError("certificate seed must be an integer")
    parsed = tuple(_segment_from_obj(s, tower, size, base, limit)
                   for s in segs)
    return XPath(pencil, start, end, parsed, tower, seed)


def certificate_from_obj(obj, base: Tower | None = None,
                         limit: int = DEFAULT_TOWER_LIMIT):
    """Parse either certificate flavor, dispatching on the problem kind."""
    problem = _require(obj, "problem", "certificate")
    if problem == "ci":
        return xpath_from_obj(obj, base, limit)
    return path_from_obj(obj, base, limit)
