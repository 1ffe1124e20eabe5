from __future__ import annotations

import random

import pytest

from oracles import amalgam_words_equal
from treeqm.errors import ParseError, UnknownLetter
from treeqm.instance import AmalgamElement, FreeElement, load_instance


def random_amalgam_letters(inst, rng, length):
    letters = []
    for _ in range(length):
        factor = rng.randrange(2)
        letters.append((factor, rng.randrange(inst.factors[factor].group.order)))
    return letters


def test_free_reduction():
    inst = load_instance({"kind": "free", "rank": 2})
    assert inst.normal_form([1, -1]) == FreeElement(())
    assert inst.multiply(inst.parse_word("1.2"), inst.parse_word("-2")) == FreeElement((1,))


def test_free_rank_guard():
    with pytest.raises(ParseError):
        load_instance({"kind": "free", "rank": 1})


def test_hnn_rejected():
    with pytest.raises(ParseError):
        load_instance({"kind": "hnn"})


def test_amalgam_c_letter_absorbs(s3z4):
    # the word (s in A)(1 in B) equals the single B-letter 3, since s = 2 here
    s = s3z4.factors[0].group.index_of("102")
    one = s3z4.factors[1].group.index_of("1")
    three = s3z4.factors[1].group.index_of("3")
    left = s3z4.normal_form([(0, s), (1, one)])
    right = s3z4.normal_form([(1, three)])
    assert left == right
    assert amalgam_words_equal(s3z4, [(0, s), (1, one)], [(1, three)])


def test_amalgam_three_syllables(s3z4):
    r = s3z4.factors[0].group.index_of("120")  # a 3-cycle, outside C
    one = s3z4.factors[1].group.index_of("1")
    el = s3z4.normal_form([(0, r), (1, one), (0, r)])
    assert s3z4.syllable_length(el) == 3


def test_normal_form_idempotent(s3z4):
    rng = random.Random(7)
    for _ in range(50):
        letters = random_amalgam_letters(s3z4, rng, rng.randrange(11))
        el = s3z4.normal_form(letters)
        letters_again = list(el.reps)
        el2 = s3z4.multiply(s3z4.normal_form(letters_again), AmalgamElement((), el.c))
        assert el2 == el


def test_homomorphism_soundness_against_reduction_oracle(s3z4):
    rng = random.Random(11)
    for _ in range(100):
        u = random_amalgam_letters(s3z4, rng, rng.randrange(11))
        w = random_amalgam_letters(s3z4, rng, rng.randrange(11))
        nf_concat = s3z4.normal_form(u + w)
        nf_mult = s3z4.multiply(s3z4.normal_form(u), s3z4.normal_form(w))
        assert nf_concat == nf_mult
        # equality of normal forms must agree with the independent word oracle
        assert amalgam_words_equal(s3z4, u + w, list(nf_mult.reps) + [(0, s3z4.factors[0].image[nf_mult.c])])


def test_normal_forms_separate_elements(s3z4):
    rng = random.Random(13)
    words = [random_amalgam_letters(s3z4, rng, rng.randrange(8)) for _ in range(40)]
    forms = [s3z4.normal_form(w) for w in words]
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            assert (forms[i] == forms[j]) == amalgam_words_equal(s3z4, words[i], words[j])


def test_amalgam_relation(s3z4):
    c_gen = 1  # the nontrivial element of Z2
    in_a = s3z4.normal_form([(0, s3z4.factors[0].image[c_gen])])
    in_b = s3z4.normal_form([(1, s3z4.factors[1].image[c_gen])])
    assert in_a == in_b


def test_multiply_invert_axioms(s3z4, free2):
    rng = random.Random(17)
    for inst in (s3z4, free2):
        for _ in range(100):
            if inst.is_free:
                letters = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(7))]
            else:
                letters = random_amalgam_letters(inst, rng, rng.randrange(7))
            g = inst.normal_form(letters)
            assert inst.multiply(g, inst.invert(g)) == inst.identity()
            assert inst.multiply(inst.invert(g), g) == inst.identity()


def test_word_parsing_round_trip(s3z4, free2):
    for inst, text in ((free2, "1.-2.1"), (s3z4, "A:120.B:1.A:102")):
        el = inst.parse_word(text)
        assert inst.parse_word(inst.format_element(el)) == el
    assert free2.parse_word("e") == free2.identity()


def test_unknown_letter(s3z4, free2):
    with pytest.raises(UnknownLetter):
        free2.parse_word("3")
    with pytest.raises(UnknownLetter):
        s3z4.parse_word("A:zzz.B:1")


def test_load_amalgam_from_json(tmp_path):
    doc = {
        "kind": "amalgam",
        "A": "sym:3",
        "B": "cyclic:4",
        "C": "cyclic:2",
        "embedA": {"0": "012", "1": "102"},
        "embedB": {"0": "0", "1": "2"},
    }
    path = tmp_path / "inst.json"
    import json

    path.write_text(json.dumps(doc))
    inst = load_instance(path)
    assert inst.kind == "amalgam"
    assert inst.coset_counts() == (3, 2)
    assert inst.fingerprint() == load_instance(doc).fingerprint()


def test_improper_amalgam_rejected():
    doc = {
        "kind": "amalgam",
        "A": "cyclic:2",
        "B": "cyclic:4",
        "C": "cyclic:2",
        "embedA": {"0": "0", "1": "1"},
        "embedB": {"0": "0", "1": "2"},
    }
    with pytest.raises(ParseError):
        load_instance(doc)
