"""Parse, normalize, resolve and compile Linguistic DS annotated documents."""
from .alignment import MediaSpan, governing_locator, resolve_span, resolve_spans
from .compiler import SemGraph, compile_document, compose_term_list, coref_clusters, export_triples
from .dependency import DependencyGraph, resolve
from .model import Diagnostic, Document, LingElement, validate
from .normalizer import NormalizationError, expand, plan_copies, reconstruct_original
from .parser import LingParseError, parse_document, parse_file, serialize_canonical
from .schemes import SchemeRegistry, builtin_registry

__all__ = [
    "MediaSpan", "governing_locator", "resolve_span", "resolve_spans",
    "SemGraph", "compile_document", "compose_term_list", "coref_clusters", "export_triples",
    "DependencyGraph", "resolve",
    "Diagnostic", "Document", "LingElement", "validate",
    "NormalizationError", "expand", "plan_copies", "reconstruct_original",
    "LingParseError", "parse_document", "parse_file", "serialize_canonical",
    "SchemeRegistry", "builtin_registry",
]
