"""Governs/depends arcs among the children of each element.

Nodes are child elements and the whitespace-delimited tokens of an
element's own text runs. Token paths append ``/#k`` (1-based, counted over
all direct text runs of the element) to the parent's element path.
Punctuation-only tokens are treated as phrasal.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

from .model import Diagnostic, Document, LingElement, iter_elements

RESOLVED = "resolved"
AMBIGUOUS = "ambiguous"

COORDINATION_KINDS = ("coordination", "apposition", "repair", "error")

_TOKEN = re.compile(r"\S+")
_PUNCT = re.compile(r"[^\w\s]+")


@dataclass(frozen=True)
class Token:
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    return [Token(m.group(0), m.start()) for m in _TOKEN.finditer(text)]


@dataclass(frozen=True)
class DepNode:
    path: str
    token: Optional[str] = None
    phrasal: bool = False

    @property
    def is_token(self) -> bool:
        return self.token is not None

    @property
    def parent_path(self) -> str:
        return self.path.rsplit("/", 1)[0]


@dataclass(frozen=True)
class Arc:
    dependant: DepNode
    governor: DepNode
    certainty: str = RESOLVED


@dataclass
class DependencyGraph:
    arcs: Dict[str, Arc] = field(default_factory=dict)
    nodes: Dict[str, List[DepNode]] = field(default_factory=dict)
    roots: Dict[str, DepNode] = field(default_factory=dict)
    candidates: Dict[str, Tuple[DepNode, ...]] = field(default_factory=dict)
    erroneous: Set[str] = field(default_factory=set)
    issues: List[Diagnostic] = field(default_factory=list)

    def governor(self, path: str) -> Optional[DepNode]:
        arc = self.arcs.get(path)
        return arc.governor if arc is not None else None

    def add(self, dependant: DepNode, governor: DepNode, certainty: str = RESOLVED) -> None:
        self.arcs[dependant.path] = Arc(dependant, governor, certainty)

    def dependants(self, path: str) -> List[DepNode]:
        return [a.dependant for a in self.arcs.values() if a.governor.path == path]

    def lines(self) -> List[str]:
        out = [f"DEP\t{a.dependant.path}\t{a.governor.path}\t{a.certainty}"
               for a in self.arcs.values()]
        for parent, cands in self.candidates.items():
            for node in self.nodes.get(parent, []):
                if node.path in self.arcs:
                    continue
                for c in cands:
                    if c.path != node.path:
                        out.append(f"DEP\t{node.path}\t{c.path}\t{AMBIGUOUS}")
        return sorted(set(out))


def child_nodes(elem: LingElement, path: str) -> List[DepNode]:
    nodes: List[DepNode] = []
    counts: Dict[str, int] = {}
    k = 0
    for item in elem.content:
        if isinstance(item, str):
            for tok in tokenize(item):
                k += 1
                # bare punctuation never heads anything
                nodes.append(DepNode(f"{path}/#{k}", tok.text, bool(_PUNCT.fullmatch(tok.text))))
        elif isinstance(item, LingElement):
            counts[item.tag] = counts.get(item.tag, 0) + 1
            nodes.append(DepNode(f"{path}/{item.tag}[{counts[item.tag]}]", phrasal=item.phrasal))
    return nodes


def chain_governors(phrasal: Sequence[bool], forward: bool) -> Tuple[Optional[int], Dict[int, int]]:
    """Root index and dependant->governor map for a forward/backward chain.

    The root is the last non-phrasal node in the preferred direction; every
    other node attaches to the nearest non-phrasal node on its preferred
    side, or on the other side when none exists there.
    """
    heads = [i for i, p in enumerate(phrasal) if not p]
    n = len(phrasal)
    if n == 1:
        return 0, {}
    if not heads:
        return None, {}
    root = heads[-1] if forward else heads[0]
    govs = {}
    for i in range(n):
        if i == root:
            continue
        ahead = [h for h in heads if (h > i if forward else h < i)]
        behind = [h for h in heads if (h < i if forward else h > i)]
        if ahead:
            govs[i] = min(ahead, key=lambda h: abs(h - i))
        else:
            govs[i] = min(behind, key=lambda h: abs(h - i))
    return root, govs


def resolve_element(elem: LingElement, path: str, graph: DependencyGraph,
                    is_variable_operator: Callable[[LingElement], bool] = lambda e: False) -> None:
    nodes = child_nodes(elem, path)
    graph.nodes[path] = nodes
    if not nodes:
        return
    synthesis = elem.effective_synthesis
    if synthesis == "none":
        return
    if len(nodes) == 1:
        graph.roots[path] = nodes[0]
        return
    kids = {n.path: c for n, c in zip([n for n in nodes if not n.is_token], elem.children)}

    if synthesis == "dependency":
        heads = [n for n in nodes if not n.phrasal]
        if len(heads) == 1:
            _attach_all(graph, path, nodes, heads[0])
        elif heads:
            graph.candidates[path] = tuple(heads)
        else:
            graph.issues.append(Diagnostic("warning", "unresolved-head", path, "no non-phrasal child"))
        return

    if synthesis in ("forward", "backward"):
        root, govs = chain_governors([n.phrasal for n in nodes], synthesis == "forward")
        if root is None:
            graph.issues.append(Diagnostic("warning", "unresolved-head", path,
                                           f"{synthesis} synthesis without a non-phrasal child"))
            return
        graph.roots[path] = nodes[root]
        for i, g in govs.items():
            graph.add(nodes[i], nodes[g])
        return

    # coordination-like syntheses: the operator child heads, the rest are arguments
    elements = [n for n in nodes if not n.is_token]
    head_children = [n for n in elements if kids[n.path].kind == "Head"]
    head: Optional[DepNode] = None
    cands: List[DepNode] = []
    if len(head_children) == 1:
        head = head_children[0]
    elif head_children:
        cands = head_children
    else:
        ops = [n for n in elements if is_variable_operator(kids[n.path])]
        tokens = [n for n in nodes if n.is_token]
        if len(ops) == 1:
            head = ops[0]
        elif ops:
            cands = ops
        elif len(tokens) == 1:
            head = tokens[0]
        else:
            cands = tokens
    conjuncts = [n for n in elements if head is None or n.path != head.path]
    if synthesis == "repair":
        graph.erroneous.update(n.path for n in conjuncts[:-1])
    elif synthesis == "error":
        graph.erroneous.update(n.path for n in conjuncts)
    if head is not None:
        _attach_all(graph, path, nodes, head)
    elif cands:
        graph.candidates[path] = tuple(cands)


def _attach_all(graph: DependencyGraph, path: str, nodes: List[DepNode], head: DepNode) -> None:
    graph.roots[path] = head
    for n in nodes:
        if n.path != head.path:
            graph.add(n, head)


def resolve_extraposition(doc: Union[Document, LingElement], graph: DependencyGraph) -> None:
    root = doc.root if isinstance(doc, Document) else doc
    ids = {}
    for p, e, _ in iter_elements(root):
        if e.id is not None:
            ids.setdefault(e.id, (p, e))
    for p, e, _ in iter_elements(root):
        refs = [r for r in e.refs("depend") if r.startswith("#")]
        if not refs:
            continue
        target = ids.get(refs[0][1:])
        if target is None:
            graph.issues.append(Diagnostic("warning", "dangling-depend", p, f"depend={refs[0]}"))
            continue
        tp, te = target
        graph.add(DepNode(p, phrasal=e.phrasal), DepNode(tp, phrasal=te.phrasal))


def resolve(doc: Union[Document, LingElement],
            is_variable_operator: Callable[[LingElement], bool] = lambda e: False
            ) -> DependencyGraph:
    root = doc.root if isinstance(doc, Document) else doc
    graph = DependencyGraph()
    for p, e, _ in iter_elements(root):
        resolve_element(e, p, graph, is_variable_operator)
    resolve_extraposition(root, graph)
    return graph
