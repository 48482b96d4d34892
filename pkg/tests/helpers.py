"""Shared fixtures, comparison oracles and hypothesis strategies."""
from __future__ import annotations

import itertools
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
from hypothesis import strategies as st

from lingds import parse_file
from lingds.compiler import core_graph
from lingds.dependency import DependencyGraph
from lingds.model import Document, LingElement, iter_elements, normalize_whitespace

FIXTURES = Path(__file__).parent / "fixtures"

_PUNCT_TOKEN = re.compile(r"^[^\w\s]+$")


def load(name: str) -> Document:
    return parse_file(FIXTURES / f"{name}.xml")


# -- tree comparison ---------------------------------------------------------

def words_only(root: LingElement) -> LingElement:
    """Whitespace-normalized copy with punctuation-only tokens removed."""
    tree = normalize_whitespace(root)
    for _, e, _ in iter_elements(tree):
        out = []
        for item in e.content:
            if isinstance(item, str):
                item = " ".join(t for t in item.split() if not _PUNCT_TOKEN.match(t))
                if not item:
                    continue
                if out and isinstance(out[-1], str):
                    out[-1] += " " + item
                    continue
            out.append(item)
        e.content = out
    return tree


# -- dependency helpers --------------------------------------------------------

def lexical_head(graph: DependencyGraph, path: str, token: Optional[str]) -> Optional[str]:
    """Follow internal roots from an element down to a token."""
    seen = set()
    while token is None:
        if path in seen or path not in graph.roots:
            return None
        seen.add(path)
        node = graph.roots[path]
        path, token = node.path, node.token
    return token.strip()


def head_word_arcs(graph: DependencyGraph) -> Set[Tuple[str, str]]:
    arcs = set()
    for a in graph.arcs.values():
        d = lexical_head(graph, a.dependant.path, a.dependant.token)
        g = lexical_head(graph, a.governor.path, a.governor.token)
        arcs.add((d, g))
    return arcs


def brute_force_chains(phrasal: Sequence[bool], forward: bool) -> List[Tuple[Optional[int], Dict[int, int]]]:
    """Every governor assignment meeting the chain constraints.

    Constraints, checked declaratively over all assignments: governors are
    non-phrasal; exactly one root with no non-phrasal node on its preferred
    side; a node looks on its preferred side when a non-phrasal node exists
    there; no non-phrasal node lies strictly between a node and its
    governor; the arcs form a tree.
    """
    n = len(phrasal)
    heads = [i for i in range(n) if not phrasal[i]]

    def side(i, j):
        return j > i if forward else j < i

    results = []
    choices = [[None] + [h for h in heads if h != i] for i in range(n)]
    for assign in itertools.product(*choices):
        roots = [i for i, g in enumerate(assign) if g is None]
        if len(roots) != 1:
            continue
        r = roots[0]
        if n > 1 and (phrasal[r] or any(side(r, h) for h in heads)):
            continue
        ok = True
        for i, g in enumerate(assign):
            if g is None:
                continue
            if any(side(i, h) for h in heads if h != i) and not side(i, g):
                ok = False
                break
            lo, hi = min(i, g), max(i, g)
            if any(lo < h < hi for h in heads):
                ok = False
                break
        if not ok:
            continue
        # acyclic: every node reaches the root
        for i in range(n):
            seen = set()
            x = i
            while assign[x] is not None and x not in seen:
                seen.add(x)
                x = assign[x]
            if x != r:
                ok = False
                break
        if ok:
            results.append((r, {i: g for i, g in enumerate(assign) if g is not None}))
    return results


# -- semantic graph helpers ---------------------------------------------------

def core_digraph(graph) -> nx.MultiDiGraph:
    core = core_graph(graph)
    g = nx.MultiDiGraph()
    for n in core.nodes:
        g.add_node(n, preds=core.predicates.get(n, frozenset()), kind=core.kinds.get(n))
    for s, rel, t in core.edges:
        g.add_edge(s, t, rel=rel)
    for r, i, a in core.args:
        g.add_edge(r, a, rel=f"arg{i}")
    return g


def cores_isomorphic(a, b) -> bool:
    return nx.is_isomorphic(
        core_digraph(a), core_digraph(b),
        node_match=lambda x, y: x["preds"] == y["preds"] and x["kind"] == y["kind"],
        edge_match=lambda x, y: sorted(d["rel"] for d in x.values()) == sorted(d["rel"] for d in y.values()),
    )


# -- hypothesis strategies ------------------------------------------------------

_TEXT = st.text(alphabet=st.sampled_from(list("ab xyz.,&<>\"'\n\té")), min_size=1, max_size=8)
_TERMS = st.sampled_from([":r:agent", ":u:boy :u:singular", ":r:beneficiary", "urn:x:y", ":d:top"])
_SYNTH = st.sampled_from([None, "dependency", "forward", "backward", "coordination", "none"])


@st.composite
def _content(draw, depth: int, ids: List[str]) -> List:
    items: List = []
    for _ in range(draw(st.integers(0, 3))):
        if draw(st.booleans()) and not (items and isinstance(items[-1], str)):
            items.append(draw(_TEXT))
        elif depth > 0:
            items.append(draw(_constituent(depth - 1, ids)))
    return items


@st.composite
def _constituent(draw, depth: int, ids: List[str]) -> LingElement:
    e = LingElement(draw(st.sampled_from(["Phrase", "Head"])))
    if draw(st.integers(0, 3)) == 0:
        e.id = f"E{len(ids) + 1}"
        ids.append(e.id)
    if ids and draw(st.integers(0, 4)) == 0:
        e.equal = "#" + draw(st.sampled_from(ids))
    if draw(st.integers(0, 4)) == 0:
        e.semantics = draw(_TERMS)
    if draw(st.integers(0, 4)) == 0:
        e.operator = draw(_TERMS)
    e.synthesis = draw(_SYNTH)
    e.content = draw(_content(depth, ids))
    return e


@st.composite
def documents(draw) -> Document:
    """Small random documents for parse/serialize round trips."""
    ids: List[str] = []
    root = LingElement("Linguistic")
    for _ in range(draw(st.integers(0, 3))):
        s = LingElement("Sentence", content=draw(_content(2, ids)))
        if draw(st.booleans()):
            s.id = f"S{len(ids) + 1}"
            ids.append(s.id)
        root.content.append(s)
    return Document(root)


@st.composite
def copy_documents(draw) -> Document:
    """Documents whose later sentences copy earlier ones, some with substitutes."""
    root = LingElement("Linguistic")
    sources: List[Tuple[str, List[str]]] = []
    n = 0
    for k in range(draw(st.integers(1, 4))):
        if sources and draw(st.booleans()):
            sid, inner = draw(st.sampled_from(sources))
            copier = LingElement("Sentence", copy="#" + sid, content=["So "])
            if inner and draw(st.booleans()):
                copier.content.append(LingElement("Phrase", substitute="#" + draw(st.sampled_from(inner)),
                                                  content=[draw(_TEXT)]))
            root.content.append(copier)
            continue
        sid = f"S{k}"
        inner = []
        s = LingElement("Sentence", id=sid)
        for _ in range(draw(st.integers(1, 3))):
            n += 1
            p = LingElement("Phrase", id=f"P{n}", content=[draw(_TEXT)])
            if inner and draw(st.booleans()):
                p.equal = "#" + draw(st.sampled_from(inner))
            inner.append(p.id)
            s.content.append(p)
            s.content.append(draw(_TEXT))
        sources.append((sid, inner))
        root.content.append(s)
    return Document(root)
