"""Compile a normalized, dependency-resolved document into a semantic graph.

Every element X gets two nodes, ``<path>!gov`` and ``<path>!self``. Local
composition unifies the governor node of a dependant with the self node of
its governor. Attributes then add labeled edges between these nodes.
Identification is kept in a union-find; nodes are never deleted, so the
export shows both the raw nodes and their equivalence classes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union
from urllib.parse import quote

from .dependency import DependencyGraph, resolve
from .model import Diagnostic, Document, LingElement, iter_elements
from .parser import TermRef, resolve_term_ref
from .schemes import ARGUMENT, MEMBER, MENTION, PARTICIPANTS, SchemeRegistry, builtin_registry

ENTITY = "entity"
PREDICATE = "predicateTerm"
MENTION_NODE = "syntaxMention"
DEICTIC = "deictic"
INTERMEDIATE = "intermediate"
LITERAL = "literal"

OPEN = "open"
UNARY = "unary"
INSTANCE = "instance"


@dataclass
class SemNode:
    id: str
    kind: str
    label: Optional[str] = None
    origin: Optional[str] = None


@dataclass(frozen=True)
class SemEdge:
    source: str
    rel: Optional[str]
    target: Optional[str]
    flags: FrozenSet[str] = frozenset()


def _q(s: Optional[str]) -> str:
    return "-" if s is None else quote(s, safe=":/#@!._~=,;+$-")


@dataclass
class SemGraph:
    nodes: Dict[str, SemNode] = field(default_factory=dict)
    edges: List[SemEdge] = field(default_factory=list)
    args: List[Tuple[str, int, str]] = field(default_factory=list)
    scopes: List[Tuple[str, str]] = field(default_factory=list)
    issues: List[Diagnostic] = field(default_factory=list)
    _parent: Dict[str, str] = field(default_factory=dict, repr=False)
    _counter: int = 0
    _mention_roots: Set[str] = field(default_factory=set, repr=False)

    def add_node(self, node_id: str, kind: str = ENTITY, label: Optional[str] = None,
                 origin: Optional[str] = None) -> str:
        if node_id not in self.nodes:
            self.nodes[node_id] = SemNode(node_id, kind, label, origin)
            self._parent[node_id] = node_id
            if kind == MENTION_NODE:
                self._mention_roots.add(node_id)
        return node_id

    def fresh(self, kind: str = INTERMEDIATE) -> str:
        self._counter += 1
        return self.add_node(f"_n{self._counter}", kind)

    def find(self, n: str) -> str:
        root = n
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[n] != root:
            self._parent[n], n = root, self._parent[n]
        return root

    def is_mention_class(self, n: str) -> bool:
        return self.find(n) in self._mention_roots

    def union(self, a: str, b: str) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return True
        if self.is_mention_class(ra) != self.is_mention_class(rb):
            # mention and use stay distinct; keep the identity as an edge
            self.edges.append(SemEdge(a, None, b, frozenset({OPEN, "mention-use"})))
            return False
        self._parent[max(ra, rb)] = min(ra, rb)
        if max(ra, rb) in self._mention_roots:
            self._mention_roots.discard(max(ra, rb))
            self._mention_roots.add(min(ra, rb))
        return True

    def members(self, rep: str) -> List[str]:
        return sorted(n for n in self.nodes if self.find(n) == rep)

    def classes(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {}
        for n in sorted(self.nodes):
            out.setdefault(self.find(n), []).append(n)
        return out

    def same(self, a: str, b: str) -> bool:
        return self.find(a) == self.find(b)

    def edge(self, src: str, rel: Optional[str], dst: Optional[str],
             flags: Iterable[str] = ()) -> SemEdge:
        e = SemEdge(src, rel, dst, frozenset(flags))
        self.edges.append(e)
        return e

    def export_lines(self) -> List[str]:
        rep = {n: min(ms) for ms in self.classes().values() for n in ms}
        lines: Set[str] = set()
        for n in self.nodes.values():
            lines.add(f"NODE {n.id} {n.kind} {_q(n.label)}")
        for e in self.edges:
            dst = rep[e.target] if e.target is not None else "-"
            flags = ",".join(sorted(e.flags)) or "-"
            lines.add(f"EDGE {rep[e.source]} {_q(e.rel)} {dst} {flags}")
        for ms in self.classes().values():
            for m in ms[1:]:
                lines.add(f"EQ {ms[0]} {m}")
        for node, intro in self.scopes:
            lines.add(f"SCOPE {rep[node]} {rep[intro]}")
        for rel, i, arg in self.args:
            lines.add(f"ARG {rep[rel]} {i} {rep[arg]}")
        return sorted(lines)

    def export(self) -> bytes:
        lines = self.export_lines()
        return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def export_triples(graph: SemGraph) -> bytes:
    return graph.export()


# -- composition -------------------------------------------------------------

def compose_term_list(graph: SemGraph, terms: List[str], source: str, target: Optional[str],
                      registry: Optional[SchemeRegistry] = None,
                      aliases: Optional[Dict[str, str]] = None,
                      source_mention: Optional[str] = None,
                      target_mention: Optional[str] = None,
                      flags: Iterable[str] = (),
                      force_binary: bool = False) -> Tuple[List[SemEdge], List[str]]:
    """Sequential composition source R1 A1 R2 ... Rn target.

    Unary terms hold of the current chain node and do not advance it. With
    no target, the last binary term ends at a fresh entity node. With
    ``force_binary`` an all-unary list uses its last term as the relation.
    Returns the new edges and the interior (intermediate) nodes.
    """
    registry = registry or builtin_registry()
    refs = [resolve_term_ref(t, registry.aliases_for(aliases or {})) for t in terms]
    unary = [registry.classify(r).kind == "unaryPredicate" for r in refs]
    if force_binary and refs and all(unary):
        unary[-1] = False
    binaries = [i for i, u in enumerate(unary) if not u]
    edges: List[SemEdge] = []
    inter: List[str] = []
    cur = source
    for i, ref in enumerate(refs):
        label = ref.uri or ref.raw
        if unary[i]:
            edges.append(graph.edge(cur, label, None, {UNARY}))
            continue
        mode = registry.arg_mode(ref.uri)
        extra = set(flags)
        src = cur
        if i == binaries[0] and mode[0] == MENTION:
            if source_mention is not None:
                src = source_mention
            else:
                extra.add("src-mention")
        if i == binaries[-1]:
            if target is None:
                dst = graph.fresh(ENTITY)
            elif mode[1] == MENTION and target_mention is not None:
                dst = target_mention
            else:
                dst = target
                if mode[1] == MENTION:
                    extra.add("dst-mention")
        else:
            dst = graph.fresh(INTERMEDIATE)
            inter.append(dst)
        edges.append(graph.edge(src, label, dst, extra))
        cur = dst
    if not binaries and target is not None and target != source:
        graph.union(source, target)
    return edges, inter


# -- compilation -------------------------------------------------------------

def _nodes(path: str) -> Tuple[str, str]:
    return f"{path}!gov", f"{path}!self"


class _Compiler:
    def __init__(self, doc: Document, dep: Optional[DependencyGraph], registry: SchemeRegistry):
        self.doc = doc
        self.root = doc.root
        self.registry = registry
        self.aliases = registry.aliases_for(doc.aliases)
        self.g = SemGraph()
        self.elems: List[Tuple[str, LingElement, Optional[LingElement]]] = list(iter_elements(self.root))
        self.path = {id(e): p for p, e, _ in self.elems}
        self.parent = {id(e): par for _, e, par in self.elems}
        self.order = {p: i for i, (p, _, _) in enumerate(self.elems)}
        self.by_path = {p: e for p, e, _ in self.elems}
        self.ids: Dict[str, LingElement] = {}
        for _, e, _ in self.elems:
            if e.id is not None:
                self.ids.setdefault(e.id, e)
        self.dep = dep if dep is not None else resolve(self.root, self.is_variable_operator)
        self.inner: Dict[str, str] = {}
        self.text_node: Dict[str, str] = {}
        self.var_nodes: Set[str] = set()

    # helpers
    def ref(self, raw: str) -> TermRef:
        return resolve_term_ref(raw, self.aliases)

    def is_variable_operator(self, e: LingElement) -> bool:
        terms = (e.operator or "").split()
        if not terms:
            return False
        cls = self.registry.classify(self.ref(terms[0]))
        return cls.kind == "relationTerm" and cls.arity == "variable"

    def end_modes(self, terms: List[str]) -> Tuple[Optional[str], Optional[str]]:
        refs = [self.ref(t) for t in terms]
        binary = [r for r in refs if self.registry.classify(r).kind != "unaryPredicate"]
        if not binary:
            return None, None
        return self.registry.arg_mode(binary[0].uri)[0], self.registry.arg_mode(binary[-1].uri)[1]

    def has_nodes(self, p: str) -> bool:
        return p in self.inner

    def self_of(self, p: str) -> str:
        return f"{p}!self"

    def gov_of(self, p: str) -> str:
        return f"{p}!gov"

    def mention(self, p: str) -> str:
        e = self.by_path[p]
        return self.g.add_node(f"{p}!mention", MENTION_NODE, " ".join(e.text().split()) or None, p)

    def note(self, severity: str, rule: str, path: str, message: str) -> None:
        self.g.issues.append(Diagnostic(severity, rule, path, message))

    def quotation_of(self, p: str) -> Optional[str]:
        e = self.by_path[p]
        while e is not None:
            if e.kind == "Quotation" and e is not self.root:
                return self.path[id(e)]
            e = self.parent.get(id(e))
        return None

    def within(self, node: LingElement, top: LingElement) -> bool:
        while node is not None:
            if node is top:
                return True
            node = self.parent.get(id(node))
        return False

    # deixis
    def resolve_deixis(self, index: str, context: str) -> Optional[str]:
        g = self.g
        if index in PARTICIPANTS:
            q = self.quotation_of(context)
            node = f"deixis:{index}" + (f"@{q}" if q else "")
            return g.add_node(node, DEICTIC, index)
        if index in ("top", "nil"):
            return g.add_node(f"deixis:{index}", DEICTIC, index)
        if index == "self":
            return self.self_of(context) if self.has_nodes(context) else g.add_node("deixis:top", DEICTIC, "top")
        if index == "previous":
            e = self.by_path[context]
            parent = self.parent.get(id(e))
            siblings = parent.children if parent is not None else []
            pos = next((i for i, s in enumerate(siblings) if s is e), 0)
            if pos == 0:
                self.note("warning", "no-previous-sibling", context, "previous-sibling deixis without a previous sibling")
                return g.add_node(f"{context}!previous", ENTITY, "unresolved")
            return self.self_of(self.path[id(siblings[pos - 1])])
        return g.add_node(f"deixis:{index}", DEICTIC, index)

    def term_node(self, raw: str, context: str, mention: bool = False) -> Tuple[Optional[str], Optional[str]]:
        """(use node, mention node) for a reference appearing in ``context``."""
        ref = self.ref(raw)
        if ref.local:
            target = self.ids.get(ref.local_id)
            if target is None:
                self.note("warning", "dangling-reference", context, f"{raw} does not resolve")
                return self.g.add_node(f"ext:{raw}", ENTITY, raw), None
            tp = self.path[id(target)]
            if not self.has_nodes(tp):
                return self.g.add_node("deixis:top", DEICTIC, "top"), None
            return self.self_of(tp), self.mention(tp) if mention else None
        cls = self.registry.classify(ref)
        if cls.kind == "deictic":
            return self.resolve_deixis(cls.index, context), None
        label = ref.uri or ref.raw
        return self.g.add_node(f"ind:{label}", ENTITY, label), None

    # main
    def run(self) -> SemGraph:
        g = self.g
        for p, e, parent in self.elems:
            if parent is None and e.kind == "LinguisticDocument":
                continue
            gov, slf = _nodes(p)
            g.add_node(gov, ENTITY, None, p)
            if self.is_variable_operator(e):
                g.add_node(slf, PREDICATE, self.ref(e.operator.split()[0]).uri, p)
                self.var_nodes.add(slf)
            else:
                g.add_node(slf, ENTITY, None, p)
            self.inner[p] = slf

        # head percolation and text nodes
        for p, e, _ in self.elems:
            if not self.has_nodes(p):
                continue
            root = self.dep.roots.get(p)
            if root is not None and not root.is_token and self.has_nodes(root.path):
                g.union(self.self_of(p), self.self_of(root.path))
                self.inner[p] = self.gov_of(root.path)
                if any(r.strip() for r in e.text_runs):
                    self.text_node[p] = g.add_node(f"{p}!text", ENTITY, None, p)
            if p not in self.text_node:
                self.text_node[p] = self.self_of(p)

        # dependency arcs
        for arc in self.dep.arcs.values():
            d = arc.dependant
            if d.is_token or not self.has_nodes(d.path):
                continue
            gv = arc.governor
            if gv.is_token:
                if self.has_nodes(gv.parent_path):
                    g.union(self.gov_of(d.path), self.text_node[gv.parent_path])
            elif self.has_nodes(gv.path):
                g.union(self.gov_of(d.path), self.self_of(gv.path))

        arg_of = self.collect_arguments()

        for p, e, _ in reversed(self.elems):
            if not self.has_nodes(p):
                continue
            self.compile_element(p, e, p in arg_of)
            self.extraposed_deixis(p, e)
        for p, e, _ in self.elems:
            self.merge_equal(p, e)
            self.attach_relations(p, e)
            self.attach_scope(p, e)
            self.attach_attributes(p, e)
        g.issues.extend(self.dep.issues)
        return g

    def collect_arguments(self) -> Set[str]:
        arg_of: Set[str] = set()
        for slf in sorted(self.var_nodes):
            kp = slf[:-len("!self")]
            deps = sorted(
                (a.dependant.path for a in self.dep.arcs.values()
                 if not a.dependant.is_token and self.has_nodes(a.dependant.path)
                 and (a.governor.path == kp or (a.governor.is_token and a.governor.parent_path == kp))),
                key=lambda x: self.order[x])
            for i, dp in enumerate(deps, 1):
                self.g.args.append((slf, i, self.self_of(dp)))
                arg_of.add(dp)
        return arg_of

    def compile_element(self, p: str, e: LingElement, is_argument: bool) -> None:
        g = self.g
        gov, slf, inner = self.gov_of(p), self.self_of(p), self.inner[p]
        ops = (e.operator or "").split()
        cs = (e.compound_semantics or "").split()
        cs_binary = [t for t in cs if self.registry.classify(self.ref(t)).kind != "unaryPredicate"]
        if slf in self.var_nodes:
            g.union(gov, slf)
            for t in ops[1:]:
                compose_term_list(g, [t], slf, None, self.registry, self.aliases)
        elif ops:
            mention = self.mention(p) if self.end_modes(ops)[1] == MENTION else None
            # an operator always relates governor and self
            all_unary = all(self.registry.classify(self.ref(t)).kind == "unaryPredicate" for t in ops)
            if all_unary:
                self.note("info", "unary-operator", p,
                          f"operator {ops[-1]} is a unary term; used as the relation name")
            compose_term_list(g, ops, gov, inner, self.registry, self.aliases,
                              target_mention=mention, force_binary=all_unary)
        elif cs_binary:
            pass
        elif any(g.same(inner, v) for v in self.var_nodes):
            # a coordination node is both self and governor of what it heads
            g.union(gov, inner)
        elif is_argument:
            compose_term_list(g, [ARGUMENT], gov, inner, self.registry, self.aliases)
        else:
            g.edge(gov, None, inner, {OPEN})

        sem = (e.semantics or "").split()
        if sem:
            compose_term_list(g, sem, self.text_node[p], None, self.registry, self.aliases)
        if cs:
            if cs_binary:
                compose_term_list(g, cs, gov, slf, self.registry, self.aliases)
                op_binary = [t for t in ops if self.registry.classify(self.ref(t)).kind != "unaryPredicate"]
                if op_binary and self.ref(op_binary[0]).uri != self.ref(cs_binary[0]).uri:
                    self.note("warning", "inconsistent-semantics", p,
                              f"operator {op_binary[0]} and compoundSemantics {cs_binary[0]} disagree")
            else:
                compose_term_list(g, cs, slf, None, self.registry, self.aliases)

    def extraposed_deixis(self, p: str, e: LingElement) -> None:
        for raw in e.refs("depend"):
            if raw.startswith("#"):
                continue
            node, _ = self.term_node(raw, p)
            if node is not None:
                self.g.union(self.gov_of(p), node)

    def merge_equal(self, p: str, e: LingElement) -> None:
        refs = e.refs("equal")
        if not refs or not self.has_nodes(p):
            return
        g = self.g
        slf = self.self_of(p)
        if len(refs) > 1:
            set_node = g.add_node(f"{p}!set", ENTITY, None, p)
            for raw in refs:
                node, _ = self.term_node(raw, p)
                g.edge(set_node, MEMBER, node)
            g.union(slf, set_node)
            return
        raw = refs[0]
        ref = self.ref(raw)
        if ref.local:
            target = self.ids.get(ref.local_id)
            if target is None:
                self.note("warning", "dangling-equal", p, f"equal={raw} does not resolve")
                return
            tp = self.path[id(target)]
            if self.quotation_of(tp) != self.quotation_of(p):
                self.note("info", "equal-crosses-quotation", p, f"equal={raw} crosses a quotation boundary")
            abstraction = self.abstraction_of(target)
            if abstraction is not None and not self.within(e, abstraction):
                g.edge(slf, None, self.self_of(tp), {OPEN, INSTANCE})
                return
            if self.has_nodes(tp):
                g.union(slf, self.self_of(tp))
            return
        node, _ = self.term_node(raw, p)
        if node is not None:
            g.union(slf, node)

    def abstraction_of(self, target: LingElement) -> Optional[LingElement]:
        """Element introducing the scope ``target`` is interpreted in, if any."""
        e = target
        while e is not None:
            if e.in_scope is not None:
                ref = self.ref(e.in_scope.split()[0])
                return self.ids.get(ref.local_id) if ref.local else None
            e = self.parent.get(id(e))
        return None

    def attach_relations(self, p: str, e: LingElement) -> None:
        g = self.g
        for k, rel in enumerate(e.relations, 1):
            terms = rel.terms
            mode = self.end_modes(terms)
            if rel.sources():
                srcs = [self.term_node(r, p, mode[0] == MENTION) for r in rel.sources()]
            elif self.has_nodes(p):
                srcs = [(self.self_of(p), self.mention(p) if mode[0] == MENTION else None)]
            else:
                srcs = [(g.add_node("deixis:top", DEICTIC, "top"), None)]
            tgts = [self.term_node(r, p, mode[1] == MENTION) for r in rel.targets()]
            if not tgts:
                self.note("warning", "relation-without-target", p, "Relation has no target")
                continue
            if rel.untyped:
                self.note("warning", "untyped-relation", p, "Relation with neither type nor typelist")
                for s, _ in srcs:
                    for t, _ in tgts:
                        g.edge(s, None, t, {OPEN})
                continue
            if len(srcs) == 1 and len(tgts) == 1:
                (s, sm), (t, tm) = srcs[0], tgts[0]
                compose_term_list(g, terms, s, t, self.registry, self.aliases,
                                  source_mention=sm, target_mention=tm)
                continue
            rnode = g.add_node(f"{p}!rel{k}", PREDICATE, " ".join(self.ref(t).uri or t for t in terms), p)
            for i, (n, m) in enumerate(srcs + tgts, 1):
                g.args.append((rnode, i, m or n))

    def attach_scope(self, p: str, e: LingElement) -> None:
        if e.in_scope is None or not self.has_nodes(p):
            return
        raw = e.in_scope.split()[0]
        ref = self.ref(raw)
        if ref.local and ref.local_id not in self.ids:
            self.note("warning", "dangling-scope", p, f"inScope={raw} does not resolve")
            return
        node, _ = self.term_node(raw, p)
        self.g.scopes.append((self.self_of(p), node))

    def attach_attributes(self, p: str, e: LingElement) -> None:
        if not self.has_nodes(p):
            return
        for name, value in (("baseForm", e.base_form), ("functionWord", e.function_word),
                            ("type", e.elem_type)):
            if value is None:
                continue
            lit = self.g.add_node(f"lit:{_q(value)}", LITERAL, value)
            self.g.edge(self.mention(p), name, lit)


def compile_document(doc: Union[Document, LingElement], dep: Optional[DependencyGraph] = None,
                     registry: Optional[SchemeRegistry] = None) -> SemGraph:
    if isinstance(doc, LingElement):
        doc = Document(doc)
    return _Compiler(doc, dep, registry or builtin_registry()).run()


compile = compile_document  # noqa: A001


def variable_operator_test(doc: Document, registry: Optional[SchemeRegistry] = None):
    """Predicate for the dependency resolver's coordination head choice."""
    c = _Compiler.__new__(_Compiler)
    c.registry = registry or builtin_registry()
    c.aliases = c.registry.aliases_for(doc.aliases)
    return c.is_variable_operator


# -- coreference -------------------------------------------------------------

def coref_clusters(doc: Union[Document, LingElement],
                   registry: Optional[SchemeRegistry] = None) -> List[List[str]]:
    """Clusters of elements linked by single-target local ``equal``.

    Members are named by id when they have one, else by path.
    """
    root = doc.root if isinstance(doc, Document) else doc
    elems = list(iter_elements(root))
    ids = {}
    for p, e, _ in elems:
        if e.id is not None:
            ids.setdefault(e.id, p)
    parent = {p: p for p, _, _ in elems}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, e, _ in elems:
        refs = e.refs("equal")
        if len(refs) == 1 and refs[0].startswith("#") and refs[0][1:] in ids:
            a, b = find(p), find(ids[refs[0][1:]])
            if a != b:
                parent[max(a, b)] = min(a, b)
    name = {p: (e.id if e.id is not None else p) for p, e, _ in elems}
    groups: Dict[str, List[str]] = {}
    for p, _, _ in elems:
        groups.setdefault(find(p), []).append(name[p])
    return sorted(sorted(m) for m in groups.values() if len(m) > 1)


def coref_members(doc: Union[Document, LingElement], element_id: str) -> List[str]:
    for cluster in coref_clusters(doc):
        if element_id in cluster:
            return cluster
    root = doc.root if isinstance(doc, Document) else doc
    if any(e.id == element_id for _, e, _ in iter_elements(root)):
        return [element_id]
    return []


# -- comparison helpers ------------------------------------------------------

@dataclass
class CoreGraph:
    """Labeled skeleton of a graph with open identity edges contracted."""
    nodes: Set[str]
    edges: Set[Tuple[str, str, str]]
    predicates: Dict[str, FrozenSet[str]]
    args: Set[Tuple[str, int, str]]
    kinds: Dict[str, str]


def core_graph(graph: SemGraph) -> CoreGraph:
    parent = {n: graph.find(n) for n in graph.nodes}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in graph.edges:
        if e.rel is None and OPEN in e.flags and INSTANCE not in e.flags and e.target is not None:
            a, b = find(e.source), find(e.target)
            if a != b:
                parent[max(a, b)] = min(a, b)
    edges = set()
    preds: Dict[str, Set[str]] = {}
    used = set()
    for e in graph.edges:
        if e.rel is None:
            continue
        s = find(e.source)
        if UNARY in e.flags:
            preds.setdefault(s, set()).add(e.rel)
            used.add(s)
        else:
            t = find(e.target)
            edges.add((s, e.rel, t))
            used.update((s, t))
    args = {(find(r), i, find(a)) for r, i, a in graph.args}
    for r, _, a in args:
        used.update((r, a))
    kinds = {}
    for n in graph.nodes:
        r = find(n)
        if graph.nodes[n].kind == PREDICATE or r not in kinds:
            kinds[r] = graph.nodes[n].kind if graph.nodes[n].kind == PREDICATE else kinds.get(r, ENTITY)
    labels = {find(n): graph.nodes[n].label for n in graph.nodes if graph.nodes[n].kind == PREDICATE}
    for r, lab in labels.items():
        if lab is not None:
            preds.setdefault(r, set()).add("@" + lab)
            used.add(r)
    return CoreGraph(used, edges, {k: frozenset(v) for k, v in preds.items()}, args,
                     {k: v for k, v in kinds.items() if k in used})
