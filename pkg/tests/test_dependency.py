import itertools

import pytest
from hypothesis import given, strategies as st

from lingds import parse_document, resolve
from lingds.dependency import AMBIGUOUS, RESOLVED, chain_governors, tokenize

from helpers import brute_force_chains, head_word_arcs, load


def arcs(xml_or_doc):
    doc = parse_document(xml_or_doc) if isinstance(xml_or_doc, str) else xml_or_doc
    g = resolve(doc)
    return {(a.dependant.path, a.governor.path) for a in g.arcs.values()}, g


def test_tokenize_offsets():
    assert [(t.text, t.offset) for t in tokenize(" a  bc\nd")] == [("a", 1), ("bc", 4), ("d", 7)]


def test_single_head_governs_siblings():
    got, g = arcs("<Phrase><Phrase>a</Phrase><Head>b</Head>.</Phrase>")
    assert got == {("/Phrase/Phrase[1]", "/Phrase/Head[1]"), ("/Phrase/#1", "/Phrase/Head[1]")}
    assert g.roots["/Phrase"].path == "/Phrase/Head[1]"


def test_phrase_phrase_head():
    got, _ = arcs(load("good_idea"))
    assert got == {("/Phrase/Phrase[1]", "/Phrase/Head[1]"), ("/Phrase/Phrase[2]", "/Phrase/Head[1]")}


def test_two_heads_are_ambiguous():
    _, g = arcs(load("head_ambiguity"))
    assert len(g.candidates["/Phrase"]) == 2
    assert any(line.endswith(AMBIGUOUS) for line in g.lines())


def test_punctuation_never_heads():
    _, g = arcs(load("tom_turned_right"))
    assert g.roots["/Linguistic/Sentence[1]"].path == "/Linguistic/Sentence[1]/Head[1]"


def test_no_synthesis_means_no_arcs():
    got, _ = arcs('<Phrase synthesis="none"><Head>a</Head><Phrase>b</Phrase></Phrase>')
    assert got == set()


def test_no_head_reports_issue():
    _, g = arcs("<Phrase><Phrase>a</Phrase><Phrase>b</Phrase></Phrase>")
    assert [d.rule for d in g.issues] == ["unresolved-head"]


@pytest.mark.parametrize("kind,want", [
    ("forward", {("very", "quickly"), ("quickly", "flying"), ("flying", "planes")}),
    ("backward", {("to", "want"), ("eat", "to")}),
])
def test_chain_equals_nested_form(kind, want):
    assert head_word_arcs(resolve(load(f"{kind}_chain"))) == want
    assert head_word_arcs(resolve(load(f"{kind}_nested"))) == want


def test_chain_with_trailing_phrase_attaches_backwards():
    root, govs = chain_governors([False, True], forward=True)
    assert root == 0 and govs == {1: 0}


@pytest.mark.parametrize("n", range(1, 7))
def test_chain_matches_brute_force(n):
    for flags in itertools.product((False, True), repeat=n):
        for forward in (True, False):
            sols = brute_force_chains(flags, forward)
            if n > 1 and all(flags):
                assert sols == [] and chain_governors(flags, forward)[0] is None
            else:
                assert sols == [chain_governors(flags, forward)]


@given(st.lists(st.booleans(), min_size=2, max_size=12), st.booleans())
def test_chain_is_a_projective_tree(flags, forward):
    root, govs = chain_governors(flags, forward)
    if all(flags):
        assert root is None
        return
    assert set(govs) | {root} == set(range(len(flags)))
    for i, g in govs.items():
        assert not flags[g]
        lo, hi = sorted((i, g))
        for j, h in govs.items():
            a, b = sorted((j, h))
            assert not (lo < a < hi < b or a < lo < b < hi)


def test_coordination_operator_heads_conjuncts():
    xml = ('<Sentence><Phrase synthesis="coordination"><Phrase>Tom</Phrase>'
           '<Head operator=":v:and">and</Head><Phrase>Mary</Phrase></Phrase></Sentence>')
    got, _ = arcs(xml)
    head = "/Sentence/Phrase[1]/Head[1]"
    assert ("/Sentence/Phrase[1]/Phrase[1]", head) in got
    assert ("/Sentence/Phrase[1]/Phrase[2]", head) in got


def test_coordination_single_token_heads():
    got, _ = arcs('<Phrase synthesis="coordination"><Phrase>Tom</Phrase> and <Phrase>Mary</Phrase></Phrase>')
    assert got == {("/Phrase/Phrase[1]", "/Phrase/#1"), ("/Phrase/Phrase[2]", "/Phrase/#1")}


def test_repair_marks_earlier_conjuncts():
    _, g = arcs(load("repair"))
    assert g.erroneous == {"/Linguistic/Sentence[1]/Head[1]/Head[1]"}


def test_error_marks_all_conjuncts():
    _, g = arcs('<Phrase synthesis="error"><Phrase>a</Phrase> or <Phrase>b</Phrase></Phrase>')
    assert g.erroneous == {"/Phrase/Phrase[1]", "/Phrase/Phrase[2]"}


def test_extraposed_depend_overrides_local_arc():
    _, g = arcs(load("extraposition"))
    arc = g.arcs["/Linguistic/Sentence[1]/Phrase[1]"]
    assert arc.governor.path == "/Linguistic/Sentence[1]/Phrase[3]/Head[1]"
    assert arc.certainty == RESOLVED


def test_dangling_depend_is_reported():
    _, g = arcs('<Sentence><Phrase depend="#X">a</Phrase><Head>b</Head></Sentence>')
    assert "dangling-depend" in [d.rule for d in g.issues]
