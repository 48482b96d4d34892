"""Symbolic alignment of elements with external media via MediaLocator.

Integer ``start``/``length`` values are read in the unit used last in the
governing locator; timecode values pass through unchanged. No media is
opened.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .model import Diagnostic, Document, LingElement, MediaLocator, XmlNode

BYTE = "byte"
TIMECODE = "timecode"

_TIMEPOINT = re.compile(r"^-?T?(\d+):(\d+):(\d+)(?::(\d+)F(\d+))?$")
_DURATION = re.compile(r"^-?P?(?:(\d+)D)?T?(?:(\d+)H)?(?:(\d+)M)?(?:(\d+)S)?(?:(\d+)N)?(?:(\d+)F)?$")


@dataclass(frozen=True)
class LocatorInfo:
    uri: Optional[str]
    unit: Optional[str]
    start: Optional[str]
    length: Optional[str]


@dataclass(frozen=True)
class MediaSpan:
    path: str
    uri: Optional[str]
    unit: Optional[str]
    start: Optional[str]
    length: Optional[str]
    resolved: bool = True

    def line(self) -> str:
        fields = [self.uri, self.unit, self.start, self.length]
        return "SPAN " + " ".join([self.path] + ["-" if f is None else f for f in fields])

    @property
    def end(self) -> Optional[int]:
        if self.start is None or self.length is None:
            return None
        if self.start.isdigit() and self.length.isdigit():
            return int(self.start) + int(self.length)
        return None


def _local(tag: str) -> str:
    return tag.rsplit(":", 1)[-1]


def locator_info(loc: Union[MediaLocator, XmlNode]) -> LocatorInfo:
    """URI, most recently used unit and own section of a locator."""
    node = loc.node if isinstance(loc, MediaLocator) else loc
    uri = unit = start = length = None
    for n in node.iter():
        tag = _local(n.tag)
        if tag == "MediaUri":
            uri = n.text().strip() or None
        elif tag == "StreamSection":
            unit = n.attrs.get("unit", unit)
            start, length = n.attrs.get("start", start), n.attrs.get("length", length)
        elif tag == "BytePosition":
            unit = BYTE
            start, length = n.attrs.get("offset", start), n.attrs.get("length", length)
        elif tag in ("MediaRelIncrTimePoint", "MediaIncrDuration", "MediaRelTimePoint"):
            unit = n.attrs.get("mediaTimeUnit", unit)
            if tag == "MediaIncrDuration":
                length = n.text().strip()
            else:
                start = n.text().strip()
        elif tag == "MediaTimePoint":
            start = n.text().strip()
        elif tag == "MediaDuration":
            length = n.text().strip()
    return LocatorInfo(uri, unit, start, length)


class _Scan:
    """Document-order positions of elements and locators."""

    def __init__(self, root: LingElement):
        self.order: Dict[int, int] = {}
        self.path: Dict[int, str] = {}
        self.parent: Dict[int, LingElement] = {}
        self.locators: Dict[int, List[Tuple[int, MediaLocator]]] = {}
        self.elements: List[LingElement] = []
        self._n = 0
        self._walk(root, "/" + root.tag, None)

    def _walk(self, e: LingElement, path: str, parent: Optional[LingElement]) -> None:
        self._n += 1
        self.order[id(e)] = self._n
        self.path[id(e)] = path
        self.elements.append(e)
        if parent is not None:
            self.parent[id(e)] = parent
        counts: Dict[str, int] = {}
        for item in e.content:
            if isinstance(item, MediaLocator):
                self._n += 1
                self.locators.setdefault(id(e), []).append((self._n, item))
            elif isinstance(item, LingElement):
                counts[item.tag] = counts.get(item.tag, 0) + 1
                self._walk(item, f"{path}/{item.tag}[{counts[item.tag]}]", e)

    def governing(self, e: LingElement) -> Optional[MediaLocator]:
        best: Optional[Tuple[int, MediaLocator]] = None
        pos = self.order[id(e)]
        a = self.parent.get(id(e))
        while a is not None:
            for n, loc in self.locators.get(id(a), []):
                if n < pos and (best is None or n > best[0]):
                    best = (n, loc)
            a = self.parent.get(id(a))
        return best[1] if best else None


def governing_locator(doc: Union[Document, LingElement], elem: LingElement) -> Optional[MediaLocator]:
    root = doc.root if isinstance(doc, Document) else doc
    return _Scan(root).governing(elem)


def _is_int(v: Optional[str]) -> bool:
    return v is not None and v.isdigit()


def _span(scan: _Scan, e: LingElement, issues: List[Diagnostic]) -> Optional[MediaSpan]:
    path = scan.path[id(e)]
    gov = scan.governing(e)
    if e.start is None:
        own = e.media_locators
        loc = own[0] if own else gov
        if loc is None:
            return None
        info = locator_info(loc)
        unit = info.unit if _is_int(info.start) else (TIMECODE if info.start else info.unit)
        return MediaSpan(path, info.uri, unit, info.start, info.length)
    if _is_int(e.start):
        if gov is None:
            issues.append(Diagnostic("warning", "no-governing-locator", path,
                                     f"start={e.start} has no MediaLocator to count from"))
            return MediaSpan(path, None, None, e.start, e.length, resolved=False)
        info = locator_info(gov)
        return MediaSpan(path, info.uri, info.unit, e.start, e.length)
    info = locator_info(gov) if gov is not None else LocatorInfo(None, None, None, None)
    return MediaSpan(path, info.uri, TIMECODE, e.start, e.length)


def resolve_span(doc: Union[Document, LingElement], elem: LingElement,
                 issues: Optional[List[Diagnostic]] = None) -> Optional[MediaSpan]:
    root = doc.root if isinstance(doc, Document) else doc
    return _span(_Scan(root), elem, issues if issues is not None else [])


def resolve_spans(doc: Union[Document, LingElement],
                  issues: Optional[List[Diagnostic]] = None) -> List[MediaSpan]:
    """Spans of every element that has one, with a non-nesting lint."""
    root = doc.root if isinstance(doc, Document) else doc
    issues = issues if issues is not None else []
    scan = _Scan(root)
    spans: Dict[int, MediaSpan] = {}
    for e in scan.elements:
        s = _span(scan, e, issues)
        if s is not None:
            spans[id(e)] = s
    for e in scan.elements:
        s, p = spans.get(id(e)), spans.get(id(scan.parent.get(id(e))))
        if s is None or p is None or not (s.resolved and p.resolved):
            continue
        if s.unit == p.unit and s.uri == p.uri and s.end is not None and p.end is not None:
            if int(s.start) < int(p.start) or s.end > p.end:
                issues.append(Diagnostic("info", "span-not-nested", s.path,
                                         f"{s.start}+{s.length} lies outside the parent span"))
    return [spans[id(e)] for e in scan.elements if id(e) in spans]


def span_lines(doc: Union[Document, LingElement]) -> List[str]:
    return sorted(s.line() for s in resolve_spans(doc) if s.resolved)


# -- unit arithmetic ---------------------------------------------------------

def duration_seconds(value: str) -> Fraction:
    """Seconds in a duration such as ``PT1N25F``, ``13N25F`` or ``PT2S``."""
    m = _DURATION.match(value)
    if not m or not any(m.groups()):
        raise ValueError(f"not a duration: {value!r}")
    d, h, mi, s, n, f = (int(g) if g else 0 for g in m.groups())
    total = Fraction(((d * 24 + h) * 60 + mi) * 60 + s)
    if n:
        total += Fraction(n, f or 1)
    return total


def timepoint_seconds(value: str) -> Fraction:
    """Seconds from the start of the day for ``T00:00:00:421F25``."""
    m = _TIMEPOINT.match(value)
    if not m:
        raise ValueError(f"not a time point: {value!r}")
    h, mi, s = int(m.group(1)), int(m.group(2)), int(m.group(3))
    total = Fraction(h * 3600 + mi * 60 + s)
    if m.group(4):
        total += Fraction(int(m.group(4)), int(m.group(5)))
    return total


def to_seconds(value: str, unit: Optional[str]) -> Fraction:
    """Convert a span bound to seconds; byte offsets have no time value."""
    if unit == TIMECODE:
        return timepoint_seconds(value) if ":" in value else duration_seconds(value)
    if unit is None or unit == BYTE or not unit.upper().startswith("P"):
        raise ValueError(f"unit {unit!r} is not a time unit")
    return int(value) * duration_seconds(unit)
