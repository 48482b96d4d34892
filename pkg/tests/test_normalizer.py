import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from lingds import NormalizationError, expand, parse_document, plan_copies, serialize_canonical
from lingds.model import iter_elements, trees_isomorphic
from lingds.normalizer import OUT_OF_LINE_TYPE, apply_edits_inverse, fresh_id, reconstruct_original

from helpers import copy_documents, load


def ids(doc):
    return {e.id: p for p, e, _ in iter_elements(doc.root) if e.id}


def by_id(doc, i):
    return next(e for _, e, _ in iter_elements(doc.root) if e.id == i)


def test_fresh_id_skips_taken():
    assert fresh_id("TOM", {"TOM", "TOM1"}) == "TOM2"


@pytest.mark.parametrize("name", ["copy_rename", "copy_substitute"])
def test_copy_snippets_match_expected_forms(name):
    diags = []
    got = expand(load(name), diags)
    assert trees_isomorphic(got.root, load(name + "_expected").root)
    assert diags == []


def test_expand_does_not_mutate_input():
    doc = load("copy_rename")
    before = serialize_canonical(doc)
    expand(doc, [])
    assert serialize_canonical(doc) == before


def test_copier_takes_copy_root_id_and_refs_follow():
    out = expand(load("multi_copy"), [])
    assert {"TALL1", "HEAVY1", "TOM1"} <= set(ids(out))
    assert by_id(out, "TOM1").text() == "Bill"
    he = [e for _, e, _ in iter_elements(out.root) if e.equal == "#TOM1"]
    assert len(he) == 1 and he[0].text().strip() == "He"


def test_copy_attributes_removed_after_expansion():
    out = expand(load("ellipsis_coordination"), [])
    for _, e, _ in iter_elements(out.root):
        assert e.copy is None and e.substitute is None and e.no_copy is None


def test_implicit_coordination_copy():
    out = expand(load("ellipsis_coordination_implicit"), [])
    sentence = out.root.children[0]
    assert len(sentence.children) == 2
    assert "wants" in sentence.children[1].text()


def test_strict_reading_keeps_reference():
    out = expand(load("wife_strict"), [])
    his = [e for _, e, _ in iter_elements(out.root) if e.text().strip() == "his"]
    assert [e.equal for e in his] == ["#TOM", "#TOM"]


def test_sloppy_reading_rebinds_reference():
    out = expand(load("wife_sloppy"), [])
    his = [e for _, e, _ in iter_elements(out.root) if e.text().strip() == "his"]
    assert [e.equal for e in his] == ["#TOM", "#TOM1"]


def test_nocopy_ancestor_builds_out_of_line_copy():
    diags = []
    out = expand(load("comparative_nocopy"), diags)
    extra = [e for _, e, _ in iter_elements(out.root) if e.elem_type == OUT_OF_LINE_TYPE]
    assert len(extra) == 1 and extra[0].synthesis == "none"
    assert by_id(out, "TOM1").text().strip() == "Mary"
    assert "bigger" not in extra[0].text()
    placeholder = [e for _, e, _ in iter_elements(out.root) if e.equal == "#TomLivesInAHouse1"]
    assert len(placeholder) == 1
    assert [d.rule for d in diags] == ["unannotated-phrase-boundary"]


def test_nocopy_inside_source_is_left_out():
    doc = parse_document('<Linguistic><Sentence id="S"><Phrase id="A">a</Phrase> b '
                         '<Phrase id="C">c</Phrase></Sentence>'
                         '<Sentence copy="#S" noCopy="#C"/></Linguistic>')
    out = expand(doc, [])
    assert out.root.children[1].text().split() == ["a", "b"]


def test_nocopy_outside_source_warns():
    doc = parse_document('<Linguistic><Sentence id="S">a</Sentence><Sentence id="T">t</Sentence>'
                         '<Sentence copy="#S" noCopy="#T"/></Linguistic>')
    diags = []
    plan_copies(doc, diags)
    assert [d.rule for d in diags] == ["nocopy-outside-source"]


@pytest.mark.parametrize("xml,needle", [
    ('<Linguistic><Sentence id="S" copy="#P"><Phrase id="P">a</Phrase></Sentence></Linguistic>', "inside the copier"),
    ('<Linguistic><Sentence copy="#NOPE"/></Linguistic>', "unresolvable"),
    ('<Linguistic><Sentence id="S">a</Sentence><Sentence id="T"><Phrase id="X">x</Phrase></Sentence>'
     '<Sentence copy="#S"><Phrase substitute="#X">y</Phrase></Sentence></Linguistic>', "not inside any copy source"),
    ('<Linguistic><Sentence id="A"><Phrase copy="#B"/></Sentence>'
     '<Sentence id="B"><Phrase copy="#A"/></Sentence></Linguistic>', "cycle"),
    ('<Linguistic><Sentence id="A">x<Phrase copy="#A"/></Sentence></Linguistic>', "cycle"),
])
def test_impossible_expansions_raise(xml, needle):
    with pytest.raises(NormalizationError, match=needle):
        expand(parse_document(xml), [])


def test_stray_substitute_is_stripped_with_warning():
    diags = []
    out = expand(parse_document('<Sentence><Phrase id="A">a</Phrase><Phrase substitute="#A">b</Phrase></Sentence>'), diags)
    assert all(e.substitute is None for _, e, _ in iter_elements(out.root))
    assert diags and diags[0].severity == "warning"


def test_chained_copies_expand_inner_first():
    doc = parse_document('<Linguistic><Sentence id="A"><Phrase id="X">x</Phrase> y</Sentence>'
                         '<Sentence id="B" copy="#A"/><Sentence copy="#B"/></Linguistic>')
    out = expand(doc, [])
    assert [s.text().split() for s in out.root.children] == [["x", "y"]] * 3


# -- edits -------------------------------------------------------------------

def test_reconstruct_original_restores_comma():
    doc = load("edit_loves")
    text, log = reconstruct_original(doc)
    assert " ".join(text.split()).endswith("and Bill , Sue .")
    assert [(e.original, e.replacement.strip()) for e in log] == [(",", "loves")]
    assert apply_edits_inverse(text, log) == doc.root.text()


def test_empty_edit_deletes_inserted_text():
    doc = parse_document('<Sentence>I <Head edit=":">really </Head>like it</Sentence>')
    text, log = reconstruct_original(doc)
    assert text == "I like it"
    assert apply_edits_inverse(text, log) == doc.root.text()


_WORD = st.text(alphabet="abc ,", min_size=0, max_size=5)


@given(st.lists(st.tuples(_WORD, st.one_of(st.none(), _WORD), _WORD), min_size=1, max_size=6))
def test_edit_log_inverse_round_trip(parts):
    from lingds.model import LingElement
    root = LingElement("Sentence")
    for before, edit, word in parts:
        if before:
            root.content.append(before)
        root.content.append(LingElement("Head", edit=None if edit is None else ":" + edit, content=[word] if word else []))
    text, log = reconstruct_original(root)
    assert apply_edits_inverse(text, log) == root.text()


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(copy_documents())
def test_expand_is_idempotent(doc):
    once = expand(doc, [])
    assert serialize_canonical(expand(once, [])) == serialize_canonical(once)
    assert all(e.copy is None for _, e, _ in iter_elements(once.root))
