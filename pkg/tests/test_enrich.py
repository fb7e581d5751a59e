import pytest
from hypothesis import given, strategies as st

from hintkit.enrich import classify_question_type, extract_entities, heuristic_entities
from hintkit.errors import ProviderError
from hintkit.model import Entity, EntityLabel, QTypeMajor, Question


class TestQuestionTyping:
    @pytest.mark.parametrize("text,major", [
        ('Who made the "I Am Prepared to Die" speech at the opening of the '
         "Rivonia Trial in April 1964?", QTypeMajor.HUM),
        ("Where is the University of Innsbruck?", QTypeMajor.LOC),
        ("Is water wet?", QTypeMajor.DESC),
        ("Whom did the committee nominate?", QTypeMajor.HUM),
        ("When did the war end?", QTypeMajor.NUM),
        ("How many moons does Mars have?", QTypeMajor.NUM),
        ("How much does it cost?", QTypeMajor.NUM),
        ("What city hosted the 1964 Olympics?", QTypeMajor.LOC),
        ("Which country borders France?", QTypeMajor.LOC),
        ("What year did the war end?", QTypeMajor.NUM),
        ("What is the abbreviation of kilogram?", QTypeMajor.ABBR),
        ("What does NER mean?", QTypeMajor.DESC),
        ("What person invented the telephone?", QTypeMajor.HUM),
        ("Which novel features a white whale?", QTypeMajor.ENTY),
    ])
    def test_major_rules(self, text, major):
        assert classify_question_type(text).major is major

    def test_minor_strings(self):
        assert classify_question_type("Who was it?").minor == "HUM:ind"
        assert classify_question_type("When was it?").minor == "NUM:date"
        assert classify_question_type("How many are there?").minor == "NUM:count"
        assert classify_question_type("Is water wet?").minor == "unknown"
        assert classify_question_type("What thing is it?").minor == "unknown"

    def test_assigns_onto_question(self):
        q = Question(text="Where is Innsbruck?")
        result = classify_question_type(q)
        assert q.question_type == result
        assert q.question_type.major is QTypeMajor.LOC

    def test_pure_and_idempotent(self):
        text = "Who discovered penicillin?"
        first = classify_question_type(text)
        assert classify_question_type(text) == first


class TestHeuristicEntities:
    def test_capitalized_run(self):
        text = "He was the first Black president of South Africa"
        entities = heuristic_entities(text)
        texts = {e.text for e in entities}
        assert "South Africa" in texts
        sa = next(e for e in entities if e.text == "South Africa")
        assert sa.label is EntityLabel.OTHER
        assert text[sa.start_index:sa.end_index] == "South Africa"
        # sentence-initial lone stopword is not an entity
        assert "He" not in texts

    def test_year_is_date(self):
        text = "in April 1964"
        entities = heuristic_entities(text)
        year = next(e for e in entities if e.text == "1964")
        assert year.label is EntityLabel.DATE
        assert text[year.start_index:year.end_index] == "1964"

    def test_no_capitals(self):
        assert heuristic_entities("he was there") == []

    def test_sentence_initial_proper_noun_kept(self):
        entities = heuristic_entities("Paris is lovely.")
        assert [e.text for e in entities] == ["Paris"]

    def test_run_broken_by_punctuation(self):
        texts = [e.text for e in heuristic_entities("Paris, France")]
        assert texts == ["Paris", "France"]

    def test_offsets_sorted(self):
        entities = heuristic_entities("Nelson Mandela visited Paris in 1990.")
        starts = [e.start_index for e in entities]
        assert starts == sorted(starts)


class TestExtractEntities:
    def test_builtin_provider_default(self):
        assert extract_entities("he was there") == []
        assert extract_entities("South Africa", provider="builtin")

    def test_unknown_string_provider(self):
        with pytest.raises(ValueError):
            extract_entities("text", provider="nope")

    def test_remote_provider_validated(self):
        def bad_offsets(text):
            return [Entity(text="xx", label=EntityLabel.PERSON, start_index=0, end_index=99)]

        with pytest.raises(ProviderError):
            extract_entities("short", provider=bad_offsets)

        def bad_slice(text):
            return [Entity(text="zz", label=EntityLabel.PERSON, start_index=0, end_index=2)]

        with pytest.raises(ProviderError):
            extract_entities("short", provider=bad_slice)

    def test_remote_provider_passthrough(self):
        def ok(text):
            return [Entity(text="sho", label=EntityLabel.PERSON, start_index=0, end_index=3)]

        entities = extract_entities("short", provider=ok)
        assert entities[0].label is EntityLabel.PERSON


@given(st.text(alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd"), whitelist_characters=" .!?,'"), max_size=120))
def test_heuristic_entities_offset_invariant(text):
    for ent in heuristic_entities(text):
        assert 0 <= ent.start_index < ent.end_index <= len(text)
        assert text[ent.start_index:ent.end_index] == ent.text
