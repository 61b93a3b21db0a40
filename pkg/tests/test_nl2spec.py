import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vsearch.errors import (
    BackendError,
    InputFormatError,
    InvalidPropositionError,
    TranslationError,
    UnparseableCompletionError,
)
from vsearch.ltlf import Proposition, parse_formula
from vsearch.nl2spec import (
    FixtureBackend,
    HttpBackend,
    RuleSet,
    SpecSet,
    backend_from_spec,
    extract_noun_phrases,
    load_spec,
    normalize_proposition,
    parse_numbered_list,
    prompt_hash,
    rules_to_ltlf,
    save_spec,
    spec_from_dict,
    translation_prompt,
)


@pytest.fixture
def backend(fixtures_dir):
    return FixtureBackend(fixtures_dir / "nl2spec" / "canned_responses.json")


class TestNormalize:
    def test_multiword(self):
        assert normalize_proposition("stop sign") == Proposition("stop_sign")

    def test_hyphen_and_case(self):
        assert normalize_proposition("Red-Light") == Proposition("red_light")

    def test_already_normal(self):
        assert normalize_proposition("faces") == Proposition("faces")

    def test_punctuation_dropped(self):
        assert normalize_proposition("driver's seat") == Proposition("drivers_seat")

    def test_empty_rejected(self):
        with pytest.raises(InvalidPropositionError):
            normalize_proposition("!!!")

    @given(st.text(min_size=1, max_size=30))
    def test_idempotent(self, phrase):
        try:
            once = normalize_proposition(phrase)
        except InvalidPropositionError:
            return
        assert normalize_proposition(once.name) == once


class TestNumberedList:
    def test_basic(self):
        assert parse_numbered_list("1. alpha\n2. beta\n") == ["alpha", "beta"]

    def test_tolerant_whitespace_and_parens(self):
        assert parse_numbered_list("  1)  alpha  \n\n 2.   beta gamma ") == ["alpha", "beta gamma"]

    def test_non_list_line_rejected(self):
        with pytest.raises(UnparseableCompletionError) as err:
            parse_numbered_list("Sure! Here are the results:\n1. alpha")
        assert "Sure!" in str(err.value)

    def test_empty_completion_rejected(self):
        with pytest.raises(UnparseableCompletionError):
            parse_numbered_list("\n  \n")


class TestExtractNounPhrases:
    def test_single_rule(self, backend):
        rules = RuleSet(("Never show faces in the video",))
        assert extract_noun_phrases(rules, backend) == ["faces"]

    def test_privacy_rules(self, backend, fixtures_dir):
        rules = RuleSet.from_file(fixtures_dir / "rules" / "privacy.txt")
        assert extract_noun_phrases(rules, backend) == [
            "female", "male", "face", "nude", "black skin", "white skin",
        ]

    def test_deduplication(self):
        class Repeats:
            def complete(self, prompt):
                return "1. faces\n2. Faces\n3. faces"

        assert extract_noun_phrases(RuleSet(("r",)), Repeats()) == ["faces"]

    def test_unparseable_completion(self):
        class Mumbles:
            def complete(self, prompt):
                return "I could not find any."

        with pytest.raises(UnparseableCompletionError):
            extract_noun_phrases(RuleSet(("r",)), Mumbles())


class TestRulesToLtlf:
    def test_traffic_rules(self, backend, fixtures_dir):
        rules = RuleSet.from_file(fixtures_dir / "rules" / "traffic.txt")
        props = ["pedestrian", "stop sign", "red light", "green light", "accelerate", "brake"]
        spec = rules_to_ltlf(rules, props, backend)
        declared = [normalize_proposition(p).name for p in props]
        assert spec.by_id()["phi1"] == parse_formula("G (pedestrian -> brake)", declared)
        assert spec.by_id()["phi2"] == parse_formula(
            "G ((stop_sign | red_light) -> X brake)", declared)
        assert spec.by_id()["phi3"] == parse_formula(
            "G ((red_light & X green_light) -> X (F accelerate))", declared)

    def test_privacy_rules(self, backend, fixtures_dir):
        rules = RuleSet.from_file(fixtures_dir / "rules" / "privacy.txt")
        props = ["female", "male", "face", "nude", "black skin", "white skin"]
        spec = rules_to_ltlf(rules, props, backend)
        declared = [normalize_proposition(p).name for p in props]
        assert spec.by_id()["phi1"] == parse_formula("G (!male & !female)", declared)
        assert spec.by_id()["phi2"] == parse_formula("G (nude -> !face)", declared)
        assert spec.by_id()["phi3"] == parse_formula("G (!black_skin & !white_skin)", declared)

    def test_undeclared_atom_reported_per_line(self):
        class BadAtom:
            def complete(self, prompt):
                return "1. G !bicycle"

        with pytest.raises(TranslationError) as err:
            rules_to_ltlf(RuleSet(("no bikes",)), ["car"], BadAtom())
        assert "bicycle" in str(err.value)
        assert err.value.line_errors[0][0] == 1

    def test_count_mismatch(self):
        class TooFew:
            def complete(self, prompt):
                return "1. G car"

        with pytest.raises(UnparseableCompletionError):
            rules_to_ltlf(RuleSet(("a", "b")), ["car"], TooFew())

    def test_no_props_rejected(self, backend):
        with pytest.raises(InputFormatError):
            rules_to_ltlf(RuleSet(("r",)), [], backend)


class TestBackends:
    def test_fixture_missing_prompt(self, backend):
        with pytest.raises(BackendError) as err:
            backend.complete("a prompt that was never canned")
        assert prompt_hash("a prompt that was never canned") in str(err.value)

    def test_backend_from_spec(self, fixtures_dir):
        assert isinstance(
            backend_from_spec(f"fixture:{fixtures_dir / 'nl2spec' / 'canned_responses.json'}"),
            FixtureBackend,
        )
        assert isinstance(backend_from_spec("http:http://localhost:1/x"), HttpBackend)
        with pytest.raises(InputFormatError):
            backend_from_spec("smoke-signals")
        with pytest.raises(InputFormatError):
            backend_from_spec("carrier-pigeon:coop")

    def test_http_round_trip(self, monkeypatch):
        seen = {}

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
                seen["prompt"] = body["prompt"]
                seen["auth"] = self.headers.get("Authorization")
                payload = json.dumps({"completion": "1. faces"}).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        server = HTTPServer(("127.0.0.1", 0), Handler)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            monkeypatch.setenv("VSEARCH_NL_TOKEN", "sesame")
            backend = HttpBackend(f"http://127.0.0.1:{server.server_port}/complete")
            assert backend.complete("name the things") == "1. faces"
            assert seen["prompt"] == "name the things"
            assert seen["auth"] == "Bearer sesame"
        finally:
            server.shutdown()

    def test_http_transport_error(self):
        backend = HttpBackend("http://127.0.0.1:9/complete", timeout=0.2)
        with pytest.raises(BackendError):
            backend.complete("anyone there?")


class TestSpecSet:
    def test_atoms_must_be_declared(self):
        with pytest.raises(InputFormatError):
            SpecSet(
                propositions=frozenset({Proposition("car")}),
                formulas=(("phi1", parse_formula("G bike", ["bike"]), 0),),
            )

    def test_spec_file_round_trip(self, backend, fixtures_dir, tmp_path):
        rules = RuleSet.from_file(fixtures_dir / "rules" / "privacy.txt")
        props = ["female", "male", "face", "nude", "black skin", "white skin"]
        spec = rules_to_ltlf(rules, props, backend)
        path = tmp_path / "spec.json"
        save_spec(spec, path)
        loaded = load_spec(path)
        assert loaded.propositions == spec.propositions
        assert loaded.by_id() == spec.by_id()

    def test_duplicate_formula_ids_rejected(self):
        with pytest.raises(InputFormatError):
            spec_from_dict({
                "propositions": ["p"],
                "formulas": [{"id": "phi", "ltlf": "p"}, {"id": "phi", "ltlf": "!p"}],
            })

    def test_rule_set_validation(self):
        with pytest.raises(InputFormatError):
            RuleSet(())
        with pytest.raises(InputFormatError):
            RuleSet(("ok", "   "))


def test_prompt_mentions_props_naturally():
    prompt = translation_prompt(RuleSet(("Stop at stop signs.",)), ["stop sign", "brake"])
    assert "atomic propositions stop sign, brake" in prompt
    assert "1. Stop at stop signs." in prompt
