import io
import subprocess
import sys

import pytest

from lingds.cli import main

from helpers import FIXTURES


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return str(FIXTURES / f"{name}.xml")


def test_validate_clean():
    assert run("validate", fx("empty"))[0] == 0


def test_validate_errors_exit_2(tmp_path):
    bad = tmp_path / "dup.xml"
    bad.write_text('<Sentence><Phrase id="A"/><Phrase id="A"/></Sentence>')
    code, out, _ = run("validate", str(bad))
    assert code == 2 and "duplicate-id" in out


def test_strict_turns_warnings_into_failures():
    assert run("validate", fx("relation_typelist"))[0] == 0
    assert run("validate", "--strict", fx("relation_typelist"))[0] == 2
    assert run("--strict", "compile", fx("relation_typelist"))[0] == 2


def test_unreadable_file_exit_1():
    code, _, err = run("validate", "/nonexistent/file.xml")
    assert code == 1 and "cannot read" in err


def test_malformed_xml_exit_3(tmp_path):
    bad = tmp_path / "bad.xml"
    bad.write_text("<Phrase><Head></Phrase>")
    assert run("compile", str(bad))[0] == 3


def test_impossible_expansion_exit_3(tmp_path):
    bad = tmp_path / "cycle.xml"
    bad.write_text('<Linguistic><Sentence id="A">x<Phrase copy="#A"/></Sentence></Linguistic>')
    assert run("normalize", str(bad))[0] == 3


def test_compile_links_his_and_tom():
    code, out, _ = run("compile", fx("tom_visited"))
    base = "/Linguistic/Paragraph[1]/Sentence[1]/"
    assert code == 0
    assert f"EQ {base}Phrase[1]!self {base}Phrase[2]/Phrase[1]!self" in out.splitlines()


def test_compile_output_is_sorted_and_stable():
    _, a, _ = run("compile", fx("bridge_paragraph"))
    _, b, _ = run("compile", fx("bridge_paragraph"))
    assert a == b and a.splitlines() == sorted(a.splitlines())


def test_compile_without_normalization_keeps_copier():
    _, plain, _ = run("compile", "--no-normalize", fx("wife_sloppy"))
    _, full, _ = run("compile", fx("wife_sloppy"))
    assert plain != full


def test_coref():
    code, out, _ = run("coref", fx("bridge_paragraph"), "ACB")
    assert code == 0 and len(out.splitlines()) == 4
    assert run("coref", fx("bridge_paragraph"), "NOPE")[0] == 2


def test_deps_and_align():
    _, out, _ = run("deps", fx("forward_chain"))
    assert len(out.splitlines()) == 3 and all(line.startswith("DEP\t") for line in out.splitlines())
    _, out, _ = run("align", fx("media_bytes"))
    assert "SPAN /Linguistic/Sentence[1]/Phrase[1] http://i-content.org/GDA/transcript.txt byte 122 6" in out


def test_normalize_prints_xml():
    _, out, _ = run("normalize", fx("copy_rename"))
    assert out.startswith("<Linguistic>") and "copy=" not in out


def test_original_restores_text():
    _, out, _ = run("original", fx("edit_loves"))
    assert " ".join(out.split()).endswith("Bill , Sue .")


def test_quiet_suppresses_diagnostics():
    assert run("compile", fx("relation_typelist"))[2]
    assert run("--quiet", "compile", fx("relation_typelist"))[2] == ""


def test_directory_mode():
    code, out, _ = run("--dir", "--quiet", "validate", str(FIXTURES))
    headers = [line for line in out.splitlines() if line.startswith("# ")]
    assert code == 0 and len(headers) == len(list(FIXTURES.glob("*.xml")))
    assert headers == sorted(headers)


def test_schemes_file(tmp_path, monkeypatch):
    cs = tmp_path / "cs.xml"
    cs.write_text('<ClassificationScheme uri="urn:test:CS" arity="unary"><Term termID="red"/></ClassificationScheme>')
    doc = tmp_path / "d.xml"
    doc.write_text('<Phrase semantics="urn:test:CS:red">a</Phrase>')
    _, without, _ = run("compile", str(doc))
    _, with_cs, _ = run("compile", "--schemes", str(cs), str(doc))
    assert "unary" in with_cs and with_cs != without
    monkeypatch.setenv("LINGDS_SCHEMES_PATH", str(cs))
    assert run("compile", str(doc))[1] == with_cs
    assert run("compile", "--schemes", str(tmp_path / "missing.xml"), str(doc))[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lingds", "validate", fx("empty")],
                          capture_output=True, text=True)
    assert proc.returncode == 0


def test_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"], io.StringIO(), io.StringIO())
    assert info.value.code == 2
