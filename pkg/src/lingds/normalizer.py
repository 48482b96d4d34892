"""Edit reconstruction and copy/substitute/noCopy expansion.

Expansion treats a ``copy`` attribute as an abstraction over the copied
elements and each ``substitute`` child as the instantiation of one of its
parts. The result is an ordinary tree with the copier replaced by fresh
copies of its sources.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Set, Tuple, Union

from .dependency import COORDINATION_KINDS, DependencyGraph, resolve_element
from .model import (
    REFERENCE_FIELDS, RELATION_REFERENCE_FIELDS, Diagnostic, Document, LingElement,
    iter_elements,
)

log = logging.getLogger(__name__)

OUT_OF_LINE_TYPE = "urn:lingds:outOfLine"
MAX_PASSES = 10000

_CONTAINER_FOR_PARENT = {
    "LinguisticDocument": "Division", "Division": "Division", "Quotation": "Division",
    "Heading": "Sentences", "Paragraph": "Sentences", "Sentences": "Sentences",
    "Sentence": "Phrase", "Head": "Phrase", "Phrase": "Phrase",
}


class NormalizationError(ValueError):
    pass


# -- edits -------------------------------------------------------------------

class EditEntry(NamedTuple):
    path: str
    offset: int  # position of ``original`` in the reconstructed text
    original: str
    replacement: str


def reconstruct_original(doc: Union[Document, LingElement]) -> Tuple[str, List[EditEntry]]:
    """Source text before annotator edits, plus the log of replacements."""
    root = doc.root if isinstance(doc, Document) else doc
    parts: List[str] = []
    entries: List[EditEntry] = []
    pos = 0

    def walk(elem: LingElement, path: str) -> None:
        nonlocal pos
        if elem.edit is not None:
            payload = elem.edit[1:]
            entries.append(EditEntry(path, pos, payload, elem.text()))
            parts.append(payload)
            pos += len(payload)
            return
        counts: Dict[str, int] = {}
        for item in elem.content:
            if isinstance(item, str):
                parts.append(item)
                pos += len(item)
            elif isinstance(item, LingElement):
                counts[item.tag] = counts.get(item.tag, 0) + 1
                walk(item, f"{path}/{item.tag}[{counts[item.tag]}]")

    walk(root, "/" + root.tag)
    return "".join(parts), entries


def apply_edits_inverse(original: str, entries: List[EditEntry]) -> str:
    """Re-apply annotator replacements to the original text."""
    text = original
    for e in sorted(entries, key=lambda e: e.offset, reverse=True):
        text = text[:e.offset] + e.replacement + text[e.offset + len(e.original):]
    return text


# -- ids ---------------------------------------------------------------------

def fresh_id(base: str, taken: Set[str]) -> str:
    n = 1
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"


# -- planning ----------------------------------------------------------------

@dataclass
class CopyPlan:
    copier: str
    sources: List[str]
    substitutions: List[Tuple[str, str]] = field(default_factory=list)  # (target, replacement)
    no_copy: List[str] = field(default_factory=list)
    ancestor_no_copy: Optional[str] = None
    implicit: bool = False


class _Index:
    def __init__(self, root: LingElement):
        self.root = root
        self.path: Dict[int, str] = {}
        self.elem: Dict[str, LingElement] = {}
        self.parent: Dict[int, LingElement] = {}
        self.ids: Dict[str, LingElement] = {}
        self.order: Dict[int, int] = {}
        for i, (p, e, parent) in enumerate(iter_elements(root)):
            self.path[id(e)] = p
            self.elem[p] = e
            self.order[id(e)] = i
            if parent is not None:
                self.parent[id(e)] = parent
            if e.id is not None:
                self.ids.setdefault(e.id, e)

    def ref(self, raw: str, where: str) -> LingElement:
        if not raw.startswith("#") or raw[1:] not in self.ids:
            raise NormalizationError(f"{where}: unresolvable reference {raw!r}")
        return self.ids[raw[1:]]

    def ancestors(self, e: LingElement) -> List[LingElement]:
        out = []
        node = self.parent.get(id(e))
        while node is not None:
            out.append(node)
            node = self.parent.get(id(node))
        return out

    def within(self, node: LingElement, top: LingElement) -> bool:
        """``node`` is ``top`` or lies below it."""
        return node is top or any(a is top for a in self.ancestors(node))


def _substitutes(copier: LingElement) -> List[LingElement]:
    """Descendants carrying ``substitute``, not crossing nested copiers."""
    out = []
    stack = list(reversed(copier.children))
    while stack:
        e = stack.pop()
        if e.substitute is not None:
            out.append(e)
            continue
        if e.copy is not None:
            continue
        stack.extend(reversed(e.children))
    return out


def plan_copies(doc: Union[Document, LingElement],
                diagnostics: Optional[List[Diagnostic]] = None) -> List[CopyPlan]:
    root = doc.root if isinstance(doc, Document) else doc
    idx = _Index(root)
    plans: List[Tuple[LingElement, List[LingElement], bool]] = []

    for p, e, _ in iter_elements(root):
        if e.copy is not None:
            plans.append((e, [idx.ref(r, p) for r in e.refs("copy")], False))
    for p, e, _ in iter_elements(root):
        if e.effective_synthesis not in COORDINATION_KINDS:
            continue
        for x in e.children:
            if x.copy is not None:
                continue
            sources: List[LingElement] = []
            for s in _substitutes(x):
                ref = s.substitute
                target = idx.ids.get(ref[1:]) if ref.startswith("#") else None
                if target is None:
                    continue
                for y in e.children:
                    if y is not x and idx.within(target, y) and y not in sources:
                        sources.append(y)
            if sources:
                sources.sort(key=lambda y: idx.order[id(y)])
                plans.append((x, sources, True))

    out: List[CopyPlan] = []
    excluded_of: Dict[int, List[LingElement]] = {}
    for copier, sources, implicit in plans:
        cpath = idx.path[id(copier)]
        plan = CopyPlan(cpath, [idx.path[id(s)] for s in sources], implicit=implicit)
        for s in sources:
            if idx.within(s, copier):
                raise NormalizationError(f"{cpath}: copy source {idx.path[id(s)]} lies inside the copier")
        excluded: List[LingElement] = []
        ancestors = idx.ancestors(copier)
        smallest_ancestor = None
        for r in copier.refs("no_copy"):
            target = idx.ref(r, cpath)
            plan.no_copy.append(idx.path[id(target)])
            inside = any(idx.within(target, s) and target is not s for s in sources)
            if inside:
                excluded.append(target)
            if any(a is target for a in ancestors):
                if smallest_ancestor is None or idx.within(target, smallest_ancestor):
                    smallest_ancestor = target
            elif not inside:
                _note(diagnostics, "warning", "nocopy-outside-source", cpath,
                      f"noCopy={r} is neither inside a copy source nor an ancestor")
        if smallest_ancestor is not None:
            plan.ancestor_no_copy = idx.path[id(smallest_ancestor)]
        for s in _substitutes(copier):
            target = idx.ref(s.substitute, idx.path[id(s)])
            if not any(idx.within(target, src) for src in sources):
                raise NormalizationError(
                    f"{idx.path[id(s)]}: substitute target {s.substitute} is not inside any copy source")
            plan.substitutions.append((idx.path[id(target)], idx.path[id(s)]))
        for s in sources:
            if idx.within(copier, s) and not any(idx.within(copier, x) for x in excluded):
                raise NormalizationError(
                    f"copy cycle: {cpath} copies its own ancestor {idx.path[id(s)]}")
        excluded_of[id(copier)] = excluded
        out.append(plan)

    # copier A depends on copier B when B is copied as part of A's sources
    copiers = {id(c): c for c, _, _ in plans}
    edges: Dict[int, List[int]] = {}
    for copier, sources, _ in plans:
        ex = excluded_of[id(copier)]
        edges[id(copier)] = [
            cid for cid, other in copiers.items()
            if cid != id(copier) and any(idx.within(other, s) for s in sources)
            and not any(idx.within(other, x) for x in ex)]
    _check_acyclic(edges, {cid: idx.path[cid_] for cid, cid_ in
                           ((k, id(v)) for k, v in copiers.items())})

    out.sort(key=lambda pl: (pl.copier.count("/"), idx.order[id(idx.elem[pl.copier])]))
    return out


def _check_acyclic(edges: Dict[int, List[int]], names: Dict[int, str]) -> None:
    state: Dict[int, int] = {}

    def visit(n: int, trail: List[int]) -> None:
        state[n] = 1
        for m in edges.get(n, []):
            if state.get(m) == 1:
                cycle = trail[trail.index(m):] + [m] if m in trail else [n, m]
                raise NormalizationError("copy cycle: " + " -> ".join(names[c] for c in cycle))
            if m not in state:
                visit(m, trail + [m])
        state[n] = 2

    for n in edges:
        if n not in state:
            visit(n, [n])


def _note(diagnostics, severity, rule, path, message):
    if diagnostics is not None:
        diagnostics.append(Diagnostic(severity, rule, path, message))
    else:
        log.warning("%s %s: %s", rule, path, message)


# -- expansion ---------------------------------------------------------------

def _dependants(idx: _Index, excluded: List[LingElement]) -> List[LingElement]:
    """Siblings that (transitively) depend on an excluded element, plus extraposed ones."""
    out: List[LingElement] = list(excluded)
    queue = list(excluded)
    while queue:
        x = queue.pop()
        parent = idx.parent.get(id(x))
        if parent is not None:
            ppath = idx.path[id(parent)]
            graph = DependencyGraph()
            resolve_element(parent, ppath, graph)
            xpath = idx.path[id(x)]
            for arc in graph.arcs.values():
                if arc.governor.path == xpath and not arc.dependant.is_token:
                    dep = idx.elem[arc.dependant.path]
                    if dep not in out:
                        out.append(dep)
                        queue.append(dep)
        if x.id is not None:
            for e in idx.elem.values():
                if f"#{x.id}" in e.refs("depend") and e not in out:
                    out.append(e)
                    queue.append(e)
    return out


def _remap(value: Optional[str], mapping: Dict[str, str]) -> Optional[str]:
    if value is None:
        return None
    return " ".join("#" + mapping[r[1:]] if r.startswith("#") and r[1:] in mapping else r
                    for r in value.split())


def _expand_one(root: LingElement, plan: CopyPlan, diagnostics) -> None:
    idx = _Index(root)
    copier = idx.elem[plan.copier]
    sources = [idx.elem[p] for p in plan.sources]
    subs = {id(idx.elem[t]): idx.elem[r] for t, r in plan.substitutions}
    excluded_roots = [idx.elem[p] for p in plan.no_copy
                      if any(idx.within(idx.elem[p], s) and idx.elem[p] is not s for s in sources)]
    excluded = {id(e) for e in _dependants(idx, excluded_roots)}
    ancestor = idx.elem[plan.ancestor_no_copy] if plan.ancestor_no_copy else None

    taken = {e.id for e in idx.elem.values() if e.id is not None}
    mapping: Dict[str, str] = {}
    originals: Dict[int, LingElement] = {}  # id(clone) -> original
    replaced: Set[int] = set()  # clones that came from substitute elements

    def clone(e: LingElement) -> Optional[LingElement]:
        if id(e) in excluded:
            return None
        if id(e) in subs:
            r = copy.deepcopy(subs[id(e)])
            r.substitute = None
            if r.id is None and e.id is not None:
                r.id = fresh_id(e.id, taken)
                taken.add(r.id)
            if e.id is not None:
                mapping[e.id] = r.id
            replaced.add(id(r))
            originals[id(r)] = e
            return r
        new = copy.copy(e)
        new.extra_attrs = dict(e.extra_attrs)
        new.content = []
        for item in e.content:
            if isinstance(item, LingElement):
                c = clone(item)
                if c is not None:
                    new.content.append(c)
            else:
                new.content.append(copy.deepcopy(item))
        originals[id(new)] = e
        return new

    clones = []
    for i, s in enumerate(sources):
        c = clone(s)
        if c is None:
            continue
        if i == 0 and copier.id is not None and ancestor is None:
            if s.id is not None:
                mapping[s.id] = copier.id
            c.id = copier.id
        clones.append(c)
    # every other id inside the copies is renamed
    for c in clones:
        for _, e, _ in iter_elements(c):
            if id(e) in replaced or e is c and c.id == copier.id and copier.id is not None:
                continue
            orig = originals.get(id(e))
            if e.id is not None and orig is not None and orig.id == e.id and e.id not in mapping:
                e.id = fresh_id(e.id, taken)
                taken.add(e.id)
                mapping[orig.id] = e.id
    for c in clones:
        _remap_refs(c, mapping, replaced)

    parent = idx.parent.get(id(copier))
    if parent is None:
        raise NormalizationError(f"{plan.copier}: the document root cannot be a copier")
    pos = next(i for i, item in enumerate(parent.content) if item is copier)

    if ancestor is None:
        parent.content[pos:pos + 1] = clones
        return

    # the copier stands for something coreferent with the copy of the
    # minimal phrase around the excluded ancestor; the copy itself goes out of line
    phrase = next((a for a in idx.ancestors(ancestor) if a.kind in ("Phrase", "Head")), None)
    inside = phrase is not None and any(idx.within(phrase, s) for s in sources)
    if not inside:
        _note(diagnostics, "warning", "unannotated-phrase-boundary", plan.copier,
              "minimal phrase around the noCopy ancestor is not annotated; using its parent element")
        phrase = idx.parent.get(id(ancestor))
    target = None
    for c in clones:
        for _, e, _ in iter_elements(c):
            if originals.get(id(e)) is phrase:
                target = e
    if target is None:
        target = clones[0] if clones else None
    stand_in = LingElement("Phrase", id=copier.id)
    if target is not None:
        if target.id is None:
            target.id = fresh_id(target.tag, taken)
            taken.add(target.id)
        stand_in.equal = "#" + target.id
    parent.content[pos] = stand_in

    first = sources[0]
    holder = idx.parent.get(id(first))
    if holder is None:
        holder = first
        hpos = len(first.content) - 1
    else:
        hpos = next(i for i, item in enumerate(holder.content) if item is first)
    container = LingElement(_CONTAINER_FOR_PARENT.get(holder.kind, holder.tag),
                            elem_type=OUT_OF_LINE_TYPE, synthesis="none", content=list(clones))
    holder.content.insert(hpos + 1, container)


def _remap_refs(tree: LingElement, mapping: Dict[str, str], replaced: Set[int]) -> None:
    """Point references inside a copy at the renamed ids.

    Material whose scope introducer lies outside the copy keeps its
    original referents (strict reading); inside the scope it re-binds.
    Substituted material is left alone.
    """
    def walk(e: LingElement, strict: bool) -> None:
        if id(e) in replaced:
            return
        if e.in_scope is not None:
            intro = e.in_scope
            strict = not (intro.startswith("#") and intro[1:] in mapping)
        if not strict:
            for fname in REFERENCE_FIELDS:
                setattr(e, fname, _remap(getattr(e, fname), mapping))
            for rel in e.relations:
                for fname in RELATION_REFERENCE_FIELDS:
                    setattr(rel, fname, _remap(getattr(rel, fname), mapping))
        else:
            e.in_scope = _remap(e.in_scope, mapping)
        for child in e.children:
            walk(child, strict)

    walk(tree, False)


def expand(doc: Union[Document, LingElement],
           diagnostics: Optional[List[Diagnostic]] = None) -> Union[Document, LingElement]:
    """Return a copy of ``doc`` with every copy attribute expanded."""
    is_doc = isinstance(doc, Document)
    work = copy.deepcopy(doc)
    root = work.root if is_doc else work
    for _ in range(MAX_PASSES):
        plans = plan_copies(root, diagnostics)
        if not plans:
            break
        _expand_one(root, plans[0], diagnostics)
    else:
        raise NormalizationError("copy expansion did not terminate")
    for p, e, _ in iter_elements(root):
        if e.substitute is not None:
            _note(diagnostics, "warning", "stray-substitute", p,
                  f"substitute={e.substitute} outside any copy")
            e.substitute = None
        e.no_copy = None
    return work
