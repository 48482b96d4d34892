"""Command-line driver: ``lingds <command> <file>``.

Exit codes: 0 ok, 1 unreadable input, 2 violations (or warnings under
``--strict``), 3 pipeline failure (malformed XML, impossible expansion).
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from .alignment import resolve_spans
from .compiler import compile_document, coref_members, variable_operator_test
from .dependency import resolve
from .model import Diagnostic, validate
from .normalizer import NormalizationError, expand, reconstruct_original
from .parser import LingParseError, parse_document, serialize_canonical
from .schemes import SchemeRegistry, builtin_registry

EXIT_OK, EXIT_UNREADABLE, EXIT_VIOLATIONS, EXIT_PIPELINE = 0, 1, 2, 3
SCHEMES_ENV = "LINGDS_SCHEMES_PATH"


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _registry(paths: List[str]) -> SchemeRegistry:
    reg = builtin_registry()
    for p in paths:
        try:
            reg.load_file(p)
        except OSError as exc:
            raise _Failure(EXIT_UNREADABLE, f"cannot read schemes {p}: {exc}")
        except Exception as exc:  # malformed scheme file
            raise _Failure(EXIT_PIPELINE, f"bad schemes file {p}: {exc}")
    return reg


def _run_one(args, path: Path, registry: SchemeRegistry) -> Tuple[str, List[Diagnostic], int]:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise _Failure(EXIT_UNREADABLE, f"cannot read {path}: {exc.strerror or exc}")
    try:
        doc = parse_document(data)
    except LingParseError as exc:
        raise _Failure(EXIT_PIPELINE, f"{path}: {exc}")
    diags: List[Diagnostic] = list(doc.diagnostics)
    cmd = args.command
    try:
        if cmd == "validate":
            report = validate(doc)
            out = "".join(f"{d}\n" for d in report)
            code = EXIT_VIOLATIONS if report.errors or (args.strict and report.warnings) else EXIT_OK
            return out, diags, code
        if cmd == "original":
            text, _ = reconstruct_original(doc)
            return text if text.endswith("\n") else text + "\n", diags, EXIT_OK
        needs_expansion = cmd in ("normalize", "deps", "align", "coref") or (
            cmd == "compile" and not args.no_normalize)
        if needs_expansion:
            doc = expand(doc, diags)
        if cmd == "normalize":
            out = serialize_canonical(doc).decode("utf-8") + "\n"
        elif cmd == "deps":
            graph = resolve(doc, variable_operator_test(doc, registry))
            diags.extend(graph.issues)
            out = "".join(line + "\n" for line in graph.lines())
        elif cmd == "compile":
            graph = compile_document(doc, registry=registry)
            diags.extend(graph.issues)
            out = graph.export().decode("utf-8")
        elif cmd == "align":
            spans = resolve_spans(doc, diags)
            out = "".join(line + "\n" for line in sorted(s.line() for s in spans if s.resolved))
        elif cmd == "coref":
            members = coref_members(doc, args.id)
            if not members:
                diags.append(Diagnostic("error", "unknown-id", "-", f"no element with id {args.id!r}"))
                return "", diags, EXIT_VIOLATIONS
            out = "".join(m + "\n" for m in members)
        else:  # pragma: no cover - argparse restricts the choices
            raise _Failure(EXIT_PIPELINE, f"unknown command {cmd}")
    except NormalizationError as exc:
        raise _Failure(EXIT_PIPELINE, f"{path}: {exc}")
    code = EXIT_OK
    if args.strict and any(d.severity in ("warning", "error") for d in diags):
        code = EXIT_VIOLATIONS
    return out, diags, code


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--schemes", action="append", default=argparse.SUPPRESS,
                        help="extra classification scheme XML file (repeatable)")
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS,
                        help="treat warnings as violations")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="suppress diagnostics on standard error")
    common.add_argument("--dir", action="store_true", default=argparse.SUPPRESS,
                        help="treat the input as a directory and process its *.xml files")

    p = argparse.ArgumentParser(prog="lingds", description="Linguistic DS annotation toolchain")
    p.add_argument("--schemes", action="append", default=[])
    p.add_argument("--strict", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--dir", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "report well-formedness violations",
        "normalize": "expand copy/substitute and print canonical XML",
        "deps": "print dependency arcs",
        "compile": "print the semantic graph as sorted records",
        "align": "print media spans",
        "coref": "print the coreference class of an id",
        "original": "print the source text before annotator edits",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text, parents=[common])
        sp.add_argument("file")
        if name == "coref":
            sp.add_argument("id")
        if name == "compile":
            sp.add_argument("--no-normalize", action="store_true",
                            help="compile without copy expansion")
    return p


def main(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = _parser().parse_args(argv)
    scheme_paths = list(args.schemes)
    if not scheme_paths and os.environ.get(SCHEMES_ENV):
        scheme_paths = [s for s in os.environ[SCHEMES_ENV].split(os.pathsep) if s]
    try:
        registry = _registry(scheme_paths)
        target = Path(args.file)
        if args.dir:
            if not target.is_dir():
                raise _Failure(EXIT_UNREADABLE, f"not a directory: {target}")
            files = sorted(target.glob("*.xml"), key=lambda f: f.name)
        else:
            files = [target]
        worst = EXIT_OK
        for f in files:
            out, diags, code = _run_one(args, f, registry)
            if args.dir:
                stdout.write(f"# {f.name}\n")
            stdout.write(out)
            if not args.quiet:
                for d in diags:
                    stderr.write(f"{f}: {d}\n")
            worst = max(worst, code)
        return worst
    except _Failure as exc:
        stderr.write(f"lingds: {exc}\n")
        return exc.code


def entry() -> None:
    sys.exit(main())

