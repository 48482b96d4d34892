"""In-memory model of a Linguistic DS document.

A document is a tree of :class:`LingElement` objects whose ``content`` is an
ordered mixed sequence of text runs (plain ``str``), child elements,
``Relation`` declarations, ``MediaLocator`` blocks and opaque XML nodes.
Text runs are kept byte-exact; nothing is stripped or re-indented.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple, Union

SYNTHESIS_KINDS = (
    "none", "dependency", "forward", "backward",
    "coordination", "apposition", "repair", "error",
)

DOCUMENT_KINDS = {"LinguisticDocument", "Division", "Quotation"}
SENTENCES_KINDS = {"Heading", "Paragraph", "Sentences"}
CONSTITUENT_KINDS = {"Sentence", "Head", "Phrase"}
KNOWN_KINDS = DOCUMENT_KINDS | SENTENCES_KINDS | CONSTITUENT_KINDS

# content models, one entry per complex type
ADMISSIBLE_CHILDREN = {
    "LinguisticDocument": frozenset(
        {"Heading", "Division", "Paragraph", "Sentences", "Sentence", "Quotation"}),
    "Sentences": frozenset({"Sentences", "Sentence", "Quotation"}),
    "SyntacticConstituent": frozenset({"Head", "Phrase", "Quotation"}),
}

PHRASAL_KINDS = {"Phrase", "Quotation"}

# attribute name in XML -> field name on LingElement
ATTRIBUTE_FIELDS = {
    "id": "id",
    "xml:lang": "lang",
    "type": "elem_type",
    "depend": "depend",
    "equal": "equal",
    "semantics": "semantics",
    "compoundSemantics": "compound_semantics",
    "operator": "operator",
    "copy": "copy",
    "noCopy": "no_copy",
    "substitute": "substitute",
    "inScope": "in_scope",
    "edit": "edit",
    "baseForm": "base_form",
    "functionWord": "function_word",
    "synthesis": "synthesis",
    "start": "start",
    "length": "length",
}
FIELD_ATTRIBUTES = {v: k for k, v in ATTRIBUTE_FIELDS.items()}

# attributes whose values are (lists of) term references that may point at ids
REFERENCE_FIELDS = ("depend", "equal", "copy", "no_copy", "substitute", "in_scope")
RELATION_REFERENCE_FIELDS = ("source", "target", "general_source", "general_target")

RELATION_ATTRIBUTES = {
    "type": "rel_type",
    "typelist": "type_list",
    "source": "source",
    "target": "target",
    "generalSource": "general_source",
    "generalTarget": "general_target",
}


def document_type_of(kind: str) -> Optional[str]:
    """Name of the complex type whose content model governs ``kind``."""
    if kind in DOCUMENT_KINDS:
        return "LinguisticDocument"
    if kind in SENTENCES_KINDS:
        return "Sentences"
    if kind in CONSTITUENT_KINDS:
        return "SyntacticConstituent"
    return None


@dataclass
class XmlNode:
    """Opaque XML kept verbatim (headers, locator internals, foreign markup)."""

    tag: str
    attrs: Dict[str, str] = field(default_factory=dict)
    content: List[Union[str, "XmlNode"]] = field(default_factory=list)

    def find(self, tag: str) -> Optional["XmlNode"]:
        for item in self.content:
            if isinstance(item, XmlNode) and item.tag == tag:
                return item
        return None

    def iter(self) -> Iterator["XmlNode"]:
        yield self
        for item in self.content:
            if isinstance(item, XmlNode):
                yield from item.iter()

    def text(self) -> str:
        return "".join(
            item if isinstance(item, str) else item.text() for item in self.content)


@dataclass
class MediaLocator:
    node: XmlNode

    @property
    def media_uri(self) -> Optional[str]:
        uri = self.node.find("MediaUri")
        return uri.text().strip() if uri is not None else None


@dataclass
class RelationDecl:
    rel_type: Optional[str] = None
    type_list: Optional[str] = None
    source: Optional[str] = None
    target: Optional[str] = None
    general_source: Optional[str] = None
    general_target: Optional[str] = None
    extra_attrs: Dict[str, str] = field(default_factory=dict)

    @property
    def terms(self) -> List[str]:
        # ``type`` first, then ``typelist``
        out = []
        if self.rel_type:
            out.extend(self.rel_type.split())
        if self.type_list:
            out.extend(self.type_list.split())
        return out

    @property
    def untyped(self) -> bool:
        return not self.terms

    def sources(self) -> List[str]:
        return _split(self.source) + _split(self.general_source)

    def targets(self) -> List[str]:
        return _split(self.target) + _split(self.general_target)


ContentItem = Union[str, "LingElement", RelationDecl, MediaLocator, XmlNode]


@dataclass
class LingElement:
    tag: str
    id: Optional[str] = None
    lang: Optional[str] = None
    elem_type: Optional[str] = None
    depend: Optional[str] = None
    equal: Optional[str] = None
    semantics: Optional[str] = None
    compound_semantics: Optional[str] = None
    operator: Optional[str] = None
    copy: Optional[str] = None
    no_copy: Optional[str] = None
    substitute: Optional[str] = None
    in_scope: Optional[str] = None
    edit: Optional[str] = None
    base_form: Optional[str] = None
    function_word: Optional[str] = None
    synthesis: Optional[str] = None
    start: Optional[str] = None
    length: Optional[str] = None
    content: List[ContentItem] = field(default_factory=list)
    extra_attrs: Dict[str, str] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "LinguisticDocument" if self.tag == "Linguistic" else self.tag

    @property
    def known(self) -> bool:
        return self.kind in KNOWN_KINDS

    @property
    def phrasal(self) -> bool:
        return self.kind in PHRASAL_KINDS

    @property
    def effective_synthesis(self) -> str:
        if self.synthesis:
            return self.synthesis
        if document_type_of(self.kind) in ("LinguisticDocument", "Sentences"):
            return "coordination"
        return "dependency"

    @property
    def children(self) -> List["LingElement"]:
        return [c for c in self.content if isinstance(c, LingElement)]

    @property
    def relations(self) -> List[RelationDecl]:
        return [c for c in self.content if isinstance(c, RelationDecl)]

    @property
    def media_locators(self) -> List[MediaLocator]:
        return [c for c in self.content if isinstance(c, MediaLocator)]

    @property
    def text_runs(self) -> List[str]:
        return [c for c in self.content if isinstance(c, str)]

    def attributes(self) -> Dict[str, str]:
        """Known attributes that are set, keyed by XML attribute name."""
        out = {}
        for fname, aname in FIELD_ATTRIBUTES.items():
            value = getattr(self, fname)
            if value is not None:
                out[aname] = value
        return out

    def refs(self, fname: str) -> List[str]:
        return _split(getattr(self, fname))

    def text(self) -> str:
        """All descendant text, concatenated in document order."""
        parts = []
        for item in self.content:
            if isinstance(item, str):
                parts.append(item)
            elif isinstance(item, LingElement):
                parts.append(item.text())
        return "".join(parts)

    def clone(self) -> "LingElement":
        return copy.deepcopy(self)


@dataclass
class Document:
    root: LingElement
    aliases: Dict[str, str] = field(default_factory=dict)
    wrapped: bool = False
    outer_headers: List[XmlNode] = field(default_factory=list)
    diagnostics: List["Diagnostic"] = field(default_factory=list, compare=False)

    def clone(self) -> "Document":
        return copy.deepcopy(self)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning | info
    rule: str
    path: str
    message: str = ""

    def __str__(self) -> str:
        return f"{self.severity}\t{self.rule}\t{self.path}\t{self.message}"


class ValidationReport(list):
    """List of :class:`Diagnostic` entries produced by :func:`validate`."""

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self if d.severity == "error"]

    @property
    def warnings(self) -> List[Diagnostic]:
        return [d for d in self if d.severity == "warning"]


def _split(value: Optional[str]) -> List[str]:
    return value.split() if value else []


def iter_elements(root: LingElement, path: Optional[str] = None
                  ) -> Iterator[Tuple[str, LingElement, Optional[LingElement]]]:
    """Pre-order walk yielding ``(path, element, parent)``.

    Paths look like ``/Linguistic/Sentence[1]/Phrase[2]``; the index counts
    preceding siblings with the same tag, starting at 1.
    """
    if path is None:
        path = "/" + root.tag
    stack = [(path, root, None)]
    while stack:
        p, elem, parent = stack.pop()
        yield p, elem, parent
        counts: Dict[str, int] = {}
        kids = []
        for child in elem.children:
            counts[child.tag] = counts.get(child.tag, 0) + 1
            kids.append((f"{p}/{child.tag}[{counts[child.tag]}]", child, elem))
        stack.extend(reversed(kids))


def element_index(root: LingElement) -> Dict[str, LingElement]:
    return {p: e for p, e, _ in iter_elements(root)}


def path_of(root: LingElement, target: LingElement) -> Optional[str]:
    for p, e, _ in iter_elements(root):
        if e is target:
            return p
    return None


def parent_map(root: LingElement) -> Dict[int, LingElement]:
    return {id(e): parent for _, e, parent in iter_elements(root) if parent is not None}


def lang_of(root: LingElement, target: LingElement) -> Optional[str]:
    """Language of ``target``, inherited from the nearest ancestor that sets one."""
    parents = parent_map(root)
    node: Optional[LingElement] = target
    while node is not None:
        if node.lang is not None:
            return node.lang
        node = parents.get(id(node))
    return None


def id_table(doc: Union[Document, LingElement]) -> Dict[str, str]:
    """Map from id to element path; the first occurrence of a duplicate wins."""
    root = doc.root if isinstance(doc, Document) else doc
    table: Dict[str, str] = {}
    for p, e, _ in iter_elements(root):
        if e.id is not None and e.id not in table:
            table[e.id] = p
    return table


def is_descendant(root: LingElement, ancestor: LingElement, node: LingElement) -> bool:
    """True when ``node`` lies strictly below ``ancestor``."""
    for _, e, _ in iter_elements(ancestor):
        if e is node and e is not ancestor:
            return True
    return False


def validate(doc: Union[Document, LingElement]) -> ValidationReport:
    """Check structural well-formedness; never raises."""
    root = doc.root if isinstance(doc, Document) else doc
    report = ValidationReport()
    seen: Dict[str, str] = {}
    all_ids = {e.id for _, e, _ in iter_elements(root) if e.id is not None}

    for p, e, parent in iter_elements(root):
        if e.id is not None:
            if e.id in seen:
                report.append(Diagnostic(
                    "error", "duplicate-id", p, f"id {e.id!r} already defined at {seen[e.id]}"))
            else:
                seen[e.id] = p
        if not e.known:
            report.append(Diagnostic("info", "unknown-kind", p, f"element {e.tag!r} is not a Linguistic DS kind"))
        if e.edit is not None and not e.edit.startswith(":"):
            report.append(Diagnostic("error", "edit-pattern", p, "edit value must begin with ':'"))
        if e.synthesis is not None and e.synthesis not in SYNTHESIS_KINDS:
            report.append(Diagnostic("error", "synthesis-enum", p, f"unknown synthesis {e.synthesis!r}"))
        if (e.base_form is not None or e.function_word is not None) and e.known \
                and e.kind not in CONSTITUENT_KINDS:
            report.append(Diagnostic(
                "error", "constituent-attribute", p,
                "baseForm/functionWord only allowed on syntactic constituents"))

        ctype = document_type_of(e.kind)
        if ctype is not None:
            allowed = ADMISSIBLE_CHILDREN[ctype]
            for child in e.children:
                if child.known and child.kind not in allowed:
                    report.append(Diagnostic(
                        "error", "child-kind", p, f"{child.tag} not allowed inside {e.tag}"))
            # the outermost Linguistic container may be empty
            if ctype == "LinguisticDocument" and parent is not None \
                    and not e.children and not e.text().strip():
                report.append(Diagnostic(
                    "error", "cardinality", p, f"{e.tag} requires at least one child"))

        for fname in REFERENCE_FIELDS:
            for ref in e.refs(fname):
                if ref.startswith("#") and ref[1:] not in all_ids:
                    report.append(Diagnostic(
                        "warning", "dangling-reference", p,
                        f"{FIELD_ATTRIBUTES[fname]}={ref} has no target"))
        for rel in e.relations:
            for fname in RELATION_REFERENCE_FIELDS:
                for ref in _split(getattr(rel, fname)):
                    if ref.startswith("#") and ref[1:] not in all_ids:
                        report.append(Diagnostic(
                            "warning", "dangling-reference", p, f"Relation {fname}={ref} has no target"))
    return report


def canonical_ids(root: LingElement, drop_unreferenced: bool = False) -> LingElement:
    """Copy of ``root`` with ids renamed ``_1, _2, ...`` in document order.

    References are renamed along with their targets, so two trees are
    isomorphic under an id bijection exactly when their canonical forms
    are equal. With ``drop_unreferenced`` ids that nothing points at are
    removed first.
    """
    tree = copy.deepcopy(root)
    referenced = set()
    for _, e, _ in iter_elements(tree):
        for fname in REFERENCE_FIELDS:
            referenced.update(r[1:] for r in e.refs(fname) if r.startswith("#"))
        for rel in e.relations:
            for fname in RELATION_REFERENCE_FIELDS:
                referenced.update(r[1:] for r in _split(getattr(rel, fname)) if r.startswith("#"))
    mapping: Dict[str, str] = {}
    for _, e, _ in iter_elements(tree):
        if e.id is None:
            continue
        if drop_unreferenced and e.id not in referenced:
            e.id = None
            continue
        mapping.setdefault(e.id, f"_{len(mapping) + 1}")
        e.id = mapping[e.id]

    def remap(value: Optional[str]) -> Optional[str]:
        if value is None:
            return None
        return " ".join(
            "#" + mapping[r[1:]] if r.startswith("#") and r[1:] in mapping else r
            for r in value.split())

    for _, e, _ in iter_elements(tree):
        for fname in REFERENCE_FIELDS:
            setattr(e, fname, remap(getattr(e, fname)))
        for rel in e.relations:
            for fname in RELATION_REFERENCE_FIELDS:
                setattr(rel, fname, remap(getattr(rel, fname)))
    return tree


def normalize_whitespace(root: LingElement) -> LingElement:
    """Copy of ``root`` with text runs collapsed and whitespace-only runs dropped."""
    tree = copy.deepcopy(root)
    for _, e, _ in iter_elements(tree):
        merged: List[ContentItem] = []
        for item in e.content:
            if isinstance(item, str) and merged and isinstance(merged[-1], str):
                merged[-1] += item
            else:
                merged.append(item)
        out: List[ContentItem] = []
        for item in merged:
            if isinstance(item, str):
                item = " ".join(item.split())
                if not item:
                    continue
            elif isinstance(item, XmlNode):
                continue
            out.append(item)
        e.content = out
    return tree


def trees_isomorphic(a: LingElement, b: LingElement, *, loose_text: bool = False,
                     ignore_unreferenced_ids: bool = False) -> bool:
    """Structural equality up to a bijection of id values."""
    if loose_text:
        a, b = normalize_whitespace(a), normalize_whitespace(b)
    return (canonical_ids(a, ignore_unreferenced_ids)
            == canonical_ids(b, ignore_unreferenced_ids))
