"""Classification scheme registry and term classification."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

from .parser import TermRef, resolve_term_ref

USE = "use"
MENTION = "mention"

DEIXIS_CS = "urn:mpeg:mpeg7:cs:DeixisCS:2002"
SEMANTIC_RELATION_CS = "urn:mpeg:mpeg7:cs:SemanticRelationCS:2001"
SYNTACTIC_RELATION_CS = "urn:mpeg:mpeg7:cs:SyntacticRelationCS:2002"
SYNTACTIC_SEMANTIC_RELATION_CS = "urn:mpeg:mpeg7:cs:SyntacticSemanticRelationCS:2002"
SEMANTIC_SYNTACTIC_RELATION_CS = "urn:mpeg:mpeg7:cs:SemanticSyntacticRelationCS:2002"
UNARY_PREDICATES = "urn:SomeOntologyOfUnaryPredicates"
VARIABLE_ARITY_RELATIONS = "urn:SomeOntologyOfVariableArityRelations"
DEIXES = "urn:SomeOntologyOfDeixes"
BASE_RELATION_CS = "urn:mpeg:mpeg7:cs:BaseRelationCS:2001"
ISO8601 = "urn:ISO8601"

ARGUMENT = SEMANTIC_RELATION_CS + ":argument"
MEMBER = BASE_RELATION_CS + ":member"

# fallbacks for fragments that carry no ClassificationSchemeAlias headers
DEFAULT_ALIASES = {
    "r": SEMANTIC_RELATION_CS,
    "u": UNARY_PREDICATES,
    "v": VARIABLE_ARITY_RELATIONS,
    "d": DEIXIS_CS,
}

PARTICIPANTS = ("p0", "p1", "p1p", "p1i", "p1x", "p2", "p2p")
DEICTIC_INDICES = PARTICIPANTS + ("nil", "top", "self")

_DEIXIS_TERMS = {
    "p0": "General public",
    "p1": "First person singular (`I')",
    "plp": "First person plural (`We')",
    "pli": "First person plural inclusive (`We' including `you')",
    "plx": "First person plural exclusive(`We' excluding `you')",
    "p2": "Second person singular (Singular `you')",
    "p2p": "Second person plural (Plural `you')",
    "nil": "Nothing",
    "top": "The top-level discourse",
    "self": "The element itself",
}
# registered termIDs use the letter l; the digit forms are accepted as synonyms
DEIXIS_SYNONYMS = {"p1p": "plp", "p1i": "pli", "p1x": "plx"}
_TERM_TO_INDEX = {v: k for k, v in DEIXIS_SYNONYMS.items()}


@dataclass(frozen=True)
class Scheme:
    uri: str
    terms: Dict[str, str] = field(default_factory=dict, hash=False)
    arg_mode: Tuple[str, str] = (USE, USE)
    arity: Optional[str] = None  # binary | unary | variable | deictic | None
    open: bool = False  # any termID is accepted (imports, open ontologies)


@dataclass(frozen=True)
class TermInfo:
    uri: str
    scheme: Optional[Scheme]
    term_id: Optional[str]
    definition: Optional[str]

    @property
    def known(self) -> bool:
        return self.scheme is not None


@dataclass(frozen=True)
class TermClass:
    kind: str  # deictic | relationTerm | unaryPredicate | individual | unknown
    arity: Optional[str] = None
    index: Optional[str] = None
    label: Optional[str] = None


class SchemeRegistry:
    def __init__(self, schemes: Iterable[Scheme] = (), aliases: Optional[Dict[str, str]] = None):
        self._schemes: Dict[str, Scheme] = {}
        for s in schemes:
            self.add(s)
        self.default_aliases = dict(DEFAULT_ALIASES if aliases is None else aliases)

    def add(self, scheme: Scheme) -> None:
        self._schemes[scheme.uri] = scheme

    def __iter__(self):
        return iter(self._schemes.values())

    def __contains__(self, uri: str) -> bool:
        return uri in self._schemes

    def scheme(self, uri: str) -> Optional[Scheme]:
        return self._schemes.get(uri)

    def aliases_for(self, doc_aliases: Dict[str, str]) -> Dict[str, str]:
        merged = dict(self.default_aliases)
        merged.update(doc_aliases)
        return merged

    def lookup(self, uri: str) -> TermInfo:
        prefix, sep, term = uri.rpartition(":")
        scheme = self._schemes.get(prefix) if sep else None
        if scheme is None:
            return TermInfo(uri, None, None, None)
        key = term
        if scheme.uri == DEIXIS_CS:
            key = DEIXIS_SYNONYMS.get(term, term)
        if key in scheme.terms:
            return TermInfo(uri, scheme, term, scheme.terms[key])
        if scheme.open:
            return TermInfo(uri, scheme, term, None)
        return TermInfo(uri, None, None, None)

    def arg_mode(self, uri: Optional[str]) -> Tuple[str, str]:
        if uri is None:
            return (USE, USE)
        info = self.lookup(uri)
        return info.scheme.arg_mode if info.known else (USE, USE)

    def classify(self, ref: TermRef) -> TermClass:
        if ref.local:
            return TermClass("individual", label=ref.raw)
        if ref.uri is None:
            return TermClass("unknown", label=ref.raw)
        if ref.uri.startswith(ISO8601 + ":"):
            return TermClass("individual", label=ref.uri[len(ISO8601) + 1:])
        info = self.lookup(ref.uri)
        if not info.known:
            return TermClass("unknown", label=ref.uri)
        arity = info.scheme.arity
        if arity == "deictic":
            index = _TERM_TO_INDEX.get(info.term_id, info.term_id)
            return TermClass("deictic", index=index, label=ref.uri)
        if arity == "unary":
            return TermClass("unaryPredicate", label=ref.uri)
        if arity in ("binary", "variable"):
            return TermClass("relationTerm", arity=arity, label=ref.uri)
        return TermClass("individual", label=ref.uri)

    def classify_raw(self, raw: str, aliases: Dict[str, str]) -> TermClass:
        return self.classify(resolve_term_ref(raw, self.aliases_for(aliases)))

    def load_file(self, path) -> None:
        """Add every ClassificationScheme found in an XML file."""
        tree = ET.parse(path)
        for el in tree.getroot().iter():
            if el.tag.rsplit("}", 1)[-1] == "ClassificationScheme":
                self.add(scheme_from_xml(el))


def scheme_from_xml(el: ET.Element) -> Scheme:
    terms = {}
    for term in el.iter():
        if term.tag.rsplit("}", 1)[-1] != "Term":
            continue
        definition = ""
        for d in term:
            if d.tag.rsplit("}", 1)[-1] == "Definition":
                definition = " ".join((d.text or "").split())
                break
        terms[term.attrib["termID"]] = definition
    has_import = any(c.tag.rsplit("}", 1)[-1] == "Import" for c in el)
    mode = tuple(el.attrib.get("argMode", "use use").split())
    return Scheme(el.attrib["uri"], terms, mode, el.attrib.get("arity", "binary"), has_import)


def builtin_registry() -> SchemeRegistry:
    return SchemeRegistry([
        Scheme(DEIXIS_CS, dict(_DEIXIS_TERMS), arity="deictic"),
        Scheme(SEMANTIC_RELATION_CS, {}, (USE, USE), "binary", open=True),
        Scheme(SYNTACTIC_RELATION_CS, {"null": "Empty"}, (MENTION, MENTION), "binary", open=True),
        Scheme(SYNTACTIC_SEMANTIC_RELATION_CS, {"null": "Empty"}, (MENTION, USE), "binary", open=True),
        Scheme(SEMANTIC_SYNTACTIC_RELATION_CS, {"null": "Empty"}, (USE, MENTION), "binary", open=True),
        Scheme(BASE_RELATION_CS, {}, (USE, USE), "binary", open=True),
        Scheme(UNARY_PREDICATES, {}, arity="unary", open=True),
        Scheme(VARIABLE_ARITY_RELATIONS, {}, arity="variable", open=True),
        Scheme(DEIXES, {"previous": "The previous sibling element"}, arity="deictic"),
    ])
