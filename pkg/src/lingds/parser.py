"""Read Linguistic DS XML into the document model and write canonical XML."""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

from .model import (
    ATTRIBUTE_FIELDS, FIELD_ATTRIBUTES, RELATION_ATTRIBUTES, SYNTHESIS_KINDS,
    Diagnostic, Document, LingElement, MediaLocator, RelationDecl, XmlNode,
)

XML_NS = "http://www.w3.org/XML/1998/namespace"
XSI_NS = "http://www.w3.org/2001/XMLSchema-instance"
MPEG7_NS = "urn:mpeg:mpeg7:schema:2001"

KNOWN_PREFIXES = {XML_NS: "xml", XSI_NS: "xsi", MPEG7_NS: "mpeg7"}
PREFIX_URIS = {"xsi": XSI_NS, "mpeg7": MPEG7_NS}

FRAGMENT_ROOTS = {"Linguistic", "Sentence", "Phrase", "Head", "Sentences",
                  "Paragraph", "Heading", "Division", "Quotation"}


class LingParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class AttributeValueError(LingParseError):
    pass


@dataclass(frozen=True)
class TermRef:
    raw: str
    uri: Optional[str]
    local: bool = False
    deictic: bool = False

    @property
    def resolved(self) -> bool:
        return self.uri is not None

    @property
    def local_id(self) -> Optional[str]:
        return self.raw[1:] if self.local else None


DEIXIS_PREFIX = "urn:mpeg:mpeg7:cs:DeixisCS:2002"


def resolve_term_ref(raw: str, aliases: Dict[str, str]) -> TermRef:
    """Expand ``:alias:term`` shortcuts; local ``#id`` and full URIs pass through."""
    if raw.startswith("#"):
        return TermRef(raw, raw, local=True)
    if raw.startswith(":"):
        alias, sep, term = raw[1:].partition(":")
        if not sep or alias not in aliases:
            return TermRef(raw, None)
        uri = f"{aliases[alias]}:{term}"
    else:
        uri = raw
    return TermRef(raw, uri, deictic=uri.startswith(DEIXIS_PREFIX + ":"))


def resolve_term_list(value: Optional[str], aliases: Dict[str, str]) -> List[TermRef]:
    return [resolve_term_ref(t, aliases) for t in (value or "").split()]


# -- reading -----------------------------------------------------------------

_ATTR_PREFIX = re.compile(r"(?<![\w.:-])([A-Za-z_][\w.-]*):[A-Za-z_][\w.-]*\s*=")
_TAG_PREFIX = re.compile(r"</?([A-Za-z_][\w.-]*):[A-Za-z_]")
_FIRST_TAG = re.compile(r"<([A-Za-z_][\w.:-]*)")


def _declare_missing_prefixes(text: str) -> str:
    used = set(_ATTR_PREFIX.findall(text)) | set(_TAG_PREFIX.findall(text))
    missing = sorted(p for p in used
                     if p not in ("xml", "xmlns") and f"xmlns:{p}" not in text)
    if not missing:
        return text
    m = _FIRST_TAG.search(text)
    if m is None:
        return text
    decls = "".join(
        f' xmlns:{p}="{PREFIX_URIS.get(p, "urn:lingds:undeclared:" + p)}"' for p in missing)
    return text[:m.end()] + decls + text[m.end():]


def _local(name: str) -> str:
    return name.rsplit("}", 1)[-1] if name.startswith("{") else name


def _attr_name(name: str) -> str:
    if name.startswith("{"):
        uri, local = name[1:].split("}", 1)
        prefix = KNOWN_PREFIXES.get(uri)
        if prefix:
            return f"{prefix}:{local}"
        return name
    return name


def _opaque(el: ET.Element) -> XmlNode:
    node = XmlNode(_local(el.tag), {_attr_name(k): v for k, v in el.attrib.items()})
    if el.text:
        node.content.append(el.text)
    for child in el:
        node.content.append(_opaque(child))
        if child.tail:
            node.content.append(child.tail)
    return node


def _relation(el: ET.Element) -> RelationDecl:
    rel = RelationDecl()
    for k, v in el.attrib.items():
        name = _attr_name(k)
        if name in RELATION_ATTRIBUTES:
            setattr(rel, RELATION_ATTRIBUTES[name], v)
        else:
            rel.extra_attrs[name] = v
    return rel


def _element(el: ET.Element, diags: List[Diagnostic], path: str) -> LingElement:
    elem = LingElement(_local(el.tag))
    for k, v in el.attrib.items():
        name = _attr_name(k)
        if name == "eq":
            diags.append(Diagnostic("warning", "deprecated-eq", path, "'eq' read as 'equal'"))
            name = "equal"
        if name in ATTRIBUTE_FIELDS:
            setattr(elem, ATTRIBUTE_FIELDS[name], v)
        else:
            elem.extra_attrs[name] = v
    if elem.edit is not None and not elem.edit.startswith(":"):
        raise AttributeValueError(f"{path}: edit value {elem.edit!r} must begin with ':'")
    if elem.synthesis is not None and elem.synthesis not in SYNTHESIS_KINDS:
        raise AttributeValueError(f"{path}: unknown synthesis {elem.synthesis!r}")

    if el.text:
        elem.content.append(el.text)
    counts: Dict[str, int] = {}
    for child in el:
        tag = _local(child.tag)
        if tag == "Relation":
            elem.content.append(_relation(child))
        elif tag == "MediaLocator":
            elem.content.append(MediaLocator(_opaque(child)))
        elif tag == "Header":
            elem.content.append(_opaque(child))
        else:
            counts[tag] = counts.get(tag, 0) + 1
            elem.content.append(_element(child, diags, f"{path}/{tag}[{counts[tag]}]"))
        if child.tail:
            elem.content.append(child.tail)
    return elem


def _find_root(top: ET.Element) -> Tuple[ET.Element, bool]:
    if _local(top.tag) == "Mpeg7":
        for el in top.iter():
            if _local(el.tag) == "Linguistic":
                return el, True
        raise LingParseError("Mpeg7 document contains no Linguistic element")
    for el in top.iter():
        if _local(el.tag) == "Linguistic":
            return el, False
    return top, False


def _collect_aliases(top: ET.Element) -> Dict[str, str]:
    aliases: Dict[str, str] = {}
    for el in top.iter():
        if _local(el.tag) == "Header" and "alias" in el.attrib and "href" in el.attrib:
            aliases.setdefault(el.attrib["alias"], el.attrib["href"])
    return aliases


def parse_document(data: Union[bytes, str]) -> Document:
    """Parse an Mpeg7 file or a bare Linguistic/Sentence/Phrase fragment."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    text = _declare_missing_prefixes(text)
    try:
        top = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise LingParseError(f"malformed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                             line, column) from None
    root_el, wrapped = _find_root(top)
    diags: List[Diagnostic] = []
    root = _element(root_el, diags, "/" + _local(root_el.tag))
    outer = []
    if wrapped:
        inside = {id(e) for e in root_el.iter()}
        outer = [_opaque(e) for e in top.iter()
                 if _local(e.tag) == "Header" and id(e) not in inside]
    return Document(root, _collect_aliases(top), wrapped, outer, diags)


def parse_file(path) -> Document:
    with open(path, "rb") as fh:
        return parse_document(fh.read())


# -- writing -----------------------------------------------------------------

def _escape_text(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace("\r", "&#13;"))


def _escape_attr(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;").replace("\n", "&#10;").replace("\t", "&#9;")
            .replace("\r", "&#13;"))


class _Writer:
    def __init__(self):
        self.namespaces: Dict[str, str] = {}

    def name(self, attr: str) -> str:
        if attr.startswith("{"):
            uri, local = attr[1:].split("}", 1)
            prefix = self.namespaces.setdefault(uri, f"ns{len(self.namespaces)}")
            return f"{prefix}:{local}"
        prefix = attr.split(":", 1)[0] if ":" in attr else None
        if prefix in PREFIX_URIS:
            self.namespaces.setdefault(PREFIX_URIS[prefix], prefix)
        return attr

    def open_tag(self, tag: str, attrs: Dict[str, str], empty: bool) -> str:
        items = sorted((self.name(k), v) for k, v in attrs.items())
        body = "".join(f' {k}="{_escape_attr(v)}"' for k, v in items)
        return f"<{tag}{body}{'/' if empty else ''}>"

    def content(self, items) -> str:
        out = []
        for item in items:
            if isinstance(item, str):
                out.append(_escape_text(item))
            elif isinstance(item, LingElement):
                out.append(self.element(item))
            elif isinstance(item, RelationDecl):
                attrs = {a: getattr(item, f) for a, f in RELATION_ATTRIBUTES.items()
                         if getattr(item, f) is not None}
                attrs.update(item.extra_attrs)
                out.append(self.open_tag("Relation", attrs, True))
            elif isinstance(item, MediaLocator):
                out.append(self.opaque(item.node))
            else:
                out.append(self.opaque(item))
        return "".join(out)

    def element(self, e: LingElement) -> str:
        attrs = dict(e.extra_attrs)
        attrs.update(e.attributes())
        if not e.content:
            return self.open_tag(e.tag, attrs, True)
        return f"{self.open_tag(e.tag, attrs, False)}{self.content(e.content)}</{e.tag}>"

    def opaque(self, n: XmlNode) -> str:
        if not n.content:
            return self.open_tag(n.tag, n.attrs, True)
        return f"{self.open_tag(n.tag, n.attrs, False)}{self.content(n.content)}</{n.tag}>"

    def declarations(self) -> str:
        return "".join(f' xmlns:{p}="{u}"'
                       for u, p in sorted(self.namespaces.items(), key=lambda kv: kv[1]))


def serialize_canonical(doc: Union[Document, LingElement]) -> bytes:
    """Deterministic UTF-8 XML with alphabetically ordered attributes."""
    if isinstance(doc, LingElement):
        doc = Document(doc)
    w = _Writer()
    body = w.element(doc.root)
    if doc.wrapped:
        w.name("xsi:type")
        headers = "".join(w.opaque(h) for h in doc.outer_headers)
        body = ('<Description xsi:type="ContentEntityType">' + headers
                + '<MultimediaContent xsi:type="LinguisticType">' + body
                + "</MultimediaContent></Description>")
        text = f"<Mpeg7{w.declarations()}>{body}</Mpeg7>"
    else:
        decls = w.declarations()
        if decls:
            m = re.match(r"<[^\s/>]+", body)
            body = body[:m.end()] + decls + body[m.end():]
        text = body
    return text.encode("utf-8")


def attribute_order(doc: Union[Document, LingElement]) -> List[str]:
    """Attribute names of the root start tag, in serialized order."""
    text = serialize_canonical(doc).decode("utf-8")
    start = re.match(r"<[^>]*>", text).group(0)
    return re.findall(r'\s([^\s=]+)="', start)


__all__ = [
    "LingParseError", "AttributeValueError", "TermRef", "resolve_term_ref",
    "resolve_term_list", "parse_document", "parse_file", "serialize_canonical",
    "FIELD_ATTRIBUTES",
]
