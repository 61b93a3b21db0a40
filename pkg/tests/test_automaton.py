import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsearch.automaton import (
    DetectionTrace,
    Frame,
    ProbabilisticAutomaton,
    State,
    Transition,
    deserialize,
    frames_to_automaton,
    load_automaton,
    load_trace,
    save_trace,
    serialize,
    validate,
)
from vsearch.errors import (
    EmptyTraceError,
    MalformedAutomatonError,
    MalformedTraceError,
    PropositionMismatchError,
)

from conftest import random_soft_trace, trace_from_probs


@pytest.fixture
def faces_trace(model):
    return trace_from_probs(model, "campus_01", {"faces": [0.0, 0.0, 0.38, 0.62, 0.97]})


class TestConstruction:
    def test_five_frame_single_prop_structure(self, model, faces_trace):
        a = frames_to_automaton(faces_trace, model)
        widths = [len(a.layer_states(l)) for l in range(a.n_layers + 1)]
        assert widths == [1, 1, 1, 2, 2, 2]
        # Edge weight into a state equals that state's probability.
        weight_into = {}
        for t in a.transitions:
            s = a.state_by_id(t.dst)
            weight_into.setdefault((s.layer, s.label["faces"]), set()).add(t.probability)
        expected = {
            (1, False): 1.0, (2, False): 1.0,
            (3, True): 0.38, (3, False): 0.62,
            (4, True): 0.62, (4, False): 0.38,
            (5, True): 0.97, (5, False): 0.03,
        }
        assert set(weight_into) == set(expected)
        for key, weights in weight_into.items():
            assert len(weights) == 1
            assert next(iter(weights)) == pytest.approx(expected[key], abs=1e-12)

    def test_two_prop_product(self, model):
        trace = trace_from_probs(model, "v", {"p1": [0.9], "p2": [0.8]})
        a = frames_to_automaton(trace, model)
        probs = sorted(t.probability for t in a.transitions)
        assert probs == [
            pytest.approx(0.02), pytest.approx(0.08),
            pytest.approx(0.18), pytest.approx(0.72),
        ]
        assert sum(probs) == pytest.approx(1.0, abs=1e-12)

    def test_saturated_prop_halves_layer(self, model):
        trace = trace_from_probs(model, "v", {"p1": [1.0], "p2": [0.6]})
        a = frames_to_automaton(trace, model)
        layer1 = a.layer_states(1)
        assert len(layer1) == 2
        assert all(s.label["p1"] for s in layer1)

    def test_hard_label_single_state(self, model):
        trace = DetectionTrace("v", 1.0, ("brake",), (
            Frame(0, 0.0, {}, {"brake": True}),
            Frame(1, 1.0, {}, {"brake": False}),
        ))
        a = frames_to_automaton(trace, model)
        assert [len(a.layer_states(l)) for l in (1, 2)] == [1, 1]
        assert a.layer_states(1)[0].label == {"brake": True}
        assert a.layer_states(2)[0].label == {"brake": False}

    def test_accepting_is_last_layer(self, model, faces_trace):
        a = frames_to_automaton(faces_trace, model)
        assert a.accepting == {s.id for s in a.layer_states(a.n_layers)}

    def test_size_bound(self, model):
        rng = random.Random(7)
        trace = random_soft_trace(rng, model, ["a", "b"], 6)
        a = frames_to_automaton(trace, model)
        assert len(a.states) <= 6 * 4 + 1

    def test_props_subset(self, model):
        trace = trace_from_probs(model, "v", {"p1": [0.9, 0.2], "p2": [0.8, 0.5]})
        a = frames_to_automaton(trace, model, props=["p1"])
        assert all(set(s.label) == {"p1"} for s in a.states if s.label is not None)

    def test_unknown_props_rejected(self, model):
        trace = trace_from_probs(model, "v", {"p1": [0.9]})
        with pytest.raises(PropositionMismatchError):
            frames_to_automaton(trace, model, props=["p1", "ghost"])

    def test_deterministic_serialization(self, model, faces_trace):
        a = serialize(frames_to_automaton(faces_trace, model))
        b = serialize(frames_to_automaton(faces_trace, model))
        assert a == b

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.lists(
        st.one_of(st.sampled_from([0.0, 1.0]), st.floats(min_value=0.05, max_value=0.95)),
        min_size=2, max_size=2), min_size=1, max_size=5))
    def test_layer_sums_stochastic(self, model, prob_rows):
        trace = trace_from_probs(model, "v", {
            "a": [row[0] for row in prob_rows],
            "b": [row[1] for row in prob_rows],
        })
        a = frames_to_automaton(trace, model)
        assert validate(a) == []


class TestValidate:
    def test_clean(self, model, faces_trace):
        assert validate(frames_to_automaton(faces_trace, model)) == []

    def test_reference_automaton_clean(self, fixtures_dir):
        a = load_automaton(fixtures_dir / "automata" / "crossing_cam_01.json")
        assert validate(a) == []

    def test_broken_outgoing_sum(self):
        a = ProbabilisticAutomaton(
            video_id="v",
            states=(State(0, 0, None), State(1, 1, {"p": True})),
            initial=0,
            accepting=frozenset({1}),
            transitions=(Transition(0, 1, 0.9),),
        )
        diags = validate(a)
        assert any(d.kind == "stochasticity" and "state 0" in d.message for d in diags)

    def test_orphan_state(self):
        a = ProbabilisticAutomaton(
            video_id="v",
            states=(State(0, 0, None), State(1, 1, {"p": True}), State(2, 1, {"p": False})),
            initial=0,
            accepting=frozenset({1, 2}),
            transitions=(Transition(0, 1, 1.0),),
        )
        assert any(d.kind == "reachability" and "state 2" in d.message for d in validate(a))

    def test_layer_jump(self):
        a = ProbabilisticAutomaton(
            video_id="v",
            states=(State(0, 0, None), State(1, 1, {"p": True}), State(2, 2, {"p": True})),
            initial=0,
            accepting=frozenset({2}),
            transitions=(Transition(0, 2, 1.0), Transition(0, 1, 1.0), Transition(1, 2, 1.0)),
        )
        assert any(d.kind == "layering" for d in validate(a))

    def test_acceptance_mismatch(self):
        a = ProbabilisticAutomaton(
            video_id="v",
            states=(State(0, 0, None), State(1, 1, {"p": True})),
            initial=0,
            accepting=frozenset(),
            transitions=(Transition(0, 1, 1.0),),
        )
        assert any(d.kind == "acceptance" for d in validate(a))

    def test_probability_out_of_range(self):
        a = ProbabilisticAutomaton(
            video_id="v",
            states=(State(0, 0, None), State(1, 1, {"p": True})),
            initial=0,
            accepting=frozenset({1}),
            transitions=(Transition(0, 1, 1.5),),
        )
        assert any(d.kind == "probability" for d in validate(a))


class TestSerialization:
    def test_round_trip(self, model, faces_trace):
        a = frames_to_automaton(faces_trace, model)
        assert deserialize(serialize(a)) == a

    def test_single_frame_round_trip(self, model):
        a = frames_to_automaton(trace_from_probs(model, "v", {"p": [0.5]}), model)
        assert deserialize(serialize(a)) == a

    def test_unknown_state_id_rejected(self, model):
        a = frames_to_automaton(trace_from_probs(model, "v", {"p": [0.5]}), model)
        doc = json.loads(serialize(a))
        doc["transitions"].append({"from": 0, "to": 99, "p": 0.5})
        with pytest.raises(MalformedAutomatonError) as err:
            deserialize(json.dumps(doc))
        assert "99" in str(err.value)

    def test_not_json(self):
        with pytest.raises(MalformedAutomatonError):
            deserialize(b"{nope")

    def test_missing_field_located(self, model):
        a = frames_to_automaton(trace_from_probs(model, "v", {"p": [0.5]}), model)
        doc = json.loads(serialize(a))
        del doc["states"][1]["layer"]
        with pytest.raises(MalformedAutomatonError) as err:
            deserialize(json.dumps(doc))
        assert "states[1]" in str(err.value)


class TestTraceSchema:
    def test_round_trip(self, model, faces_trace, tmp_path):
        path = tmp_path / "t.json"
        save_trace(faces_trace, path)
        assert load_trace(path) == faces_trace

    def test_empty_rejected(self):
        with pytest.raises(EmptyTraceError):
            DetectionTrace("v", 1.0, ("p",), ())

    def test_missing_proposition_rejected(self):
        with pytest.raises(MalformedTraceError):
            DetectionTrace("v", 1.0, ("p", "q"), (Frame(0, 0.0, {"p": 0.5}),))

    def test_soft_and_hard_conflict(self):
        with pytest.raises(MalformedTraceError):
            Frame(0, 0.0, {"p": 0.5}, {"p": True})

    def test_indices_strictly_increasing(self):
        with pytest.raises(MalformedTraceError):
            DetectionTrace("v", 1.0, ("p",),
                           (Frame(1, 0.0, {"p": 0.5}), Frame(1, 1.0, {"p": 0.5})))

    def test_confidence_range(self):
        with pytest.raises(MalformedTraceError):
            Frame(0, 0.0, {"p": 1.5})

    def test_undeclared_frame_prop(self):
        with pytest.raises(MalformedTraceError):
            DetectionTrace("v", 1.0, ("p",), (Frame(0, 0.0, {"p": 0.5, "q": 0.5}),))
