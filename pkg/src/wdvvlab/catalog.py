"""The bundled corpus: every potential, relation, family, transformation
and data table the library verifies, in a line-oriented text format.

One entry per ``corpus/<id>.case`` file.  Sections open with ``[name]``;
the body is ``key = expression`` lines; ``#`` starts a comment.  The
format is deliberately diffable and hand-auditable; the verification
suite itself is the transcription oracle (a failing exact identity
localizes a bad term).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .algext import AlgebraicRelation
from .exprio import parse, render
from .kernel import KernelError, Poly, RatFrac, Ring, WeightVector, as_mpq

CORPUS_DIR = os.path.join(os.path.dirname(__file__), "corpus")
CORPUS_ENV = "WDVVLAB_CORPUS"


class CatalogError(KeyError):
    pass


class EntryUnavailable(CatalogError):
    """The id names a case the catalog knows but cannot provide
    (recorded as to-be-determined or not regular)."""


@dataclass
class ConjugacyDatum:
    group: str
    label: str            # e.g. "H4(3)"
    exponents: tuple      # invariant degrees, empty when not regular
    degree: int | None    # extension degree of the associated potential
    regular: bool
    note: str = ""


@dataclass
class CatalogEntry:
    id: str
    kind: str
    note: str = ""
    tier: str = "base"
    status: str = "ok"
    ring: Ring | None = None
    flat_vars: tuple = ()
    alg_var: str | None = None
    weights: WeightVector | None = None
    relation: AlgebraicRelation | None = None
    potential: object = None
    vector_field: list | None = None
    euler_weights: tuple = ()
    family: object = None
    family_vars: tuple = ()
    params: tuple = ()
    transform: dict | None = None
    constants: list = field(default_factory=list)
    source_vars: tuple = ()
    target_vars: tuple = ()
    supports: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    conjugacy: ConjugacyDatum | None = None

    @property
    def degree_data(self):
        return self.conjugacy


def corpus_dir(override=None):
    return override or os.environ.get(CORPUS_ENV) or CORPUS_DIR


def _read_sections(path):
    sections = {}
    order = []
    current = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].rstrip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                sections.setdefault(current, [])
                order.append(current)
                continue
            if current is None:
                raise CatalogError("%s:%d: content before any section"
                                   % (path, lineno))
            if "=" not in line:
                raise CatalogError("%s:%d: expected key = value"
                                   % (path, lineno))
            k, v = line.split("=", 1)
            sections[current].append((k.strip(), v.strip()))
    return sections


def _as_dict(pairs):
    return {k: v for k, v in pairs}


def list_entries(kind=None, directory=None):
    out = []
    d = corpus_dir(directory)
    for name in sorted(os.listdir(d)):
        if not name.endswith(".case"):
            continue
        eid = name[:-5]
        meta = _as_dict(_read_sections(os.path.join(d, name)).get("meta", []))
        if kind is None or meta.get("kind") == kind:
            out.append(eid)
    return out


def load_entry(eid, directory=None):
    path = os.path.join(corpus_dir(directory), eid + ".case")
    if not os.path.exists(path):
        raise CatalogError("unknown catalog id %r" % eid)
    sections = _read_sections(path)
    meta = _as_dict(sections.get("meta", []))
    entry = CatalogEntry(id=eid,
                         kind=meta.get("kind", ""),
                         note=meta.get("note", ""),
                         tier=meta.get("tier", "base"),
                         status=meta.get("status", "ok"))
    entry.raw = sections
    if "class" in meta:
        entry.conjugacy = conjugacy_datum(meta["class"], directory)
    if entry.status != "ok":
        raise EntryUnavailable("case %s is marked %s: %s"
                               % (eid, entry.status, entry.note))
    kind = entry.kind
    if kind in ("potential", "vector_field"):
        _load_potential(entry, sections)
    elif kind == "family":
        _load_family(entry, sections)
    elif kind == "transform":
        _load_transform(entry, sections)
    elif kind == "schedule":
        pass  # consumed raw by the construct module
    else:
        raise CatalogError("case %s has unknown kind %r" % (eid, kind))
    return entry


def _vars_of(sections):
    v = _as_dict(sections.get("vars", []))
    flat = tuple(v.get("flat", "").split())
    alg = v.get("alg", "").strip() or None
    return flat, alg


def _parse_defs(sections, ring):
    """[defs] name = expr; later expressions may use the names, which are
    substituted away after parsing."""
    defs = {}
    pairs = sections.get("defs", [])
    if not pairs:
        return ring, {}
    ext = ring.extended([k for k, _ in pairs])
    for k, src in pairs:
        p = parse(src, ext)
        defs[k] = p if isinstance(p, Poly) else p.as_poly()
    return ext, defs


def _expand(expr_src, ring, ext, defs):
    val = parse(expr_src, ext)
    if defs:
        bind = dict(defs)
        val = val.subs(bind, ext) if isinstance(val, Poly) else val.subs(bind)
        # drop the def variables from the ambient ring again
        val = _contract(val, ring, ext)
    return val


def _contract(val, ring, ext):
    def shrink(p):
        t = {}
        for e, c in ((ext.unpack(k), c) for k, c in p.t.items()):
            if any(e[i] for i in range(ring.nvars, ext.nvars)):
                raise CatalogError("definition name survived substitution")
            t[e[:ring.nvars]] = c
        return ring.from_terms(t)
    if isinstance(val, RatFrac):
        return RatFrac(shrink(val.num), shrink(val.den))
    return shrink(val)


def _load_potential(entry, sections):
    flat, alg = _vars_of(sections)
    names = flat + ((alg,) if alg else ())
    ring = Ring(names)
    entry.ring = ring
    entry.flat_vars = flat
    entry.alg_var = alg
    w = _as_dict(sections.get("weights", {})).get("w")
    if w:
        entry.weights = WeightVector(w.split())
    ext, defs = _parse_defs(sections, ring)
    if alg:
        rel_src = _as_dict(sections["relation"])["m"]
        m = _expand(rel_src, ring, ext, defs)
        if isinstance(m, RatFrac):
            m = m.as_poly()
        entry.relation = AlgebraicRelation(ring, alg, m)
    if entry.kind == "potential":
        f_src = _as_dict(sections["potential"])["F"]
        entry.potential = _expand(f_src, ring, ext, defs)
    else:
        pairs = sections.get("vector_field", [])
        entry.vector_field = [v for _, v in pairs]
        entry.vector_field = [_expand(src, ring, ext, defs)
                              for _, src in pairs]
        ew = _as_dict(sections.get("euler", {})).get("w")
        entry.euler_weights = tuple(as_mpq(x) for x in ew.split()) if ew \
            else ()


def _load_family(entry, sections):
    v = _as_dict(sections.get("vars", []))
    xy = tuple(v.get("xy", "x y").split())
    params = tuple(v.get("params", "").split())
    ring = Ring(xy + params)
    entry.ring = ring
    entry.family_vars = xy
    entry.params = params
    ext, defs = _parse_defs(sections, ring)
    f = _expand(_as_dict(sections["family"])["f"], ring, ext, defs)
    if isinstance(f, RatFrac):
        f = f.as_poly()
    entry.family = f
    w = _as_dict(sections.get("weights", {})).get("w")
    if w:
        entry.extras["param_weights"] = tuple(as_mpq(x) for x in w.split())
    supp = _as_dict(sections.get("support", []))
    entry.supports = supp
    entry.extras.update(_as_dict(sections.get("extras", [])))


def _load_transform(entry, sections):
    v = _as_dict(sections.get("vars", []))
    entry.source_vars = tuple(v.get("source", "").split())
    entry.target_vars = tuple(v.get("target", "").split())
    consts = []
    for name, spec in sections.get("constants", []):
        k, q = spec.split(":")
        consts.append((name, int(k), as_mpq(q.strip())))
    entry.constants = consts
    ring = Ring(entry.source_vars + tuple(n for n, _, _ in consts))
    entry.ring = ring
    entry.transform = {}
    for name, src in sections.get("transform", []):
        entry.transform[name] = parse(src, ring)
    entry.extras = _as_dict(sections.get("extras", []))


def load_conjugacy_data(directory=None):
    path = os.path.join(corpus_dir(directory), "conjugacy.data")
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            group, idx, exps, deg = parts[0], parts[1], parts[2], parts[3]
            note = " ".join(parts[4:])
            regular = exps != "-"
            out.append(ConjugacyDatum(
                group=group,
                label="%s(%s)" % (group, idx),
                exponents=tuple(int(x) for x in exps.split(","))
                if regular else (),
                degree=None if deg == "-" else int(deg),
                regular=regular,
                note=note))
    return out


def conjugacy_datum(label, directory=None):
    for d in load_conjugacy_data(directory):
        if d.label == label:
            return d
    raise CatalogError("unknown conjugacy class %r" % label)


def roundtrip_ok(p):
    """parse(render(p)) == p, the catalog's own sanity check."""
    if isinstance(p, RatFrac):
        got = parse(render(p), p.ring)
        return got == p
    return parse(render(p), p.ring) == p
