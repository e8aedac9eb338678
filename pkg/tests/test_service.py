import json
import threading

import pytest
from fastapi.testclient import TestClient

from semscan.agent import AgentSession, HeuristicBackend, build_tool_registry
from semscan.fixtures import demo_fixture
from semscan.scanpath import Utterance, compose
from semscan.scenarios import EvalCondition, builtin_scenario
from semscan.segmentation import SegmentationParams, build_gaze_history
from semscan.server import create_app
from semscan.service import ServiceError, SessionManager

PARAMS = SegmentationParams()
FIXTURE = demo_fixture("breakfast", "T1", rate_hz=50.0)


def new_session(manager: SessionManager, **kwargs) -> str:
    scenario = builtin_scenario("breakfast")
    return manager.create_session(
        scenario.scene,
        PARAMS,
        EvalCondition(True),
        HeuristicBackend(),
        initial_contents=scenario.contents,
        **kwargs,
    )


class TestSessionManager:
    def test_create_emits_event_zero(self):
        manager = SessionManager()
        sid = new_session(manager)
        events = manager.get(sid).events_since(0)
        assert events[0].seq == 0
        assert events[0].kind == "session_created"

    def test_distinct_ids(self):
        manager = SessionManager()
        assert new_session(manager) != new_session(manager)

    def test_unknown_session_not_found(self):
        with pytest.raises(ServiceError) as excinfo:
            SessionManager().get("nope")
        assert excinfo.value.code == "session_not_found"

    def test_monotone_poses_accepted_stale_rejected(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        session.ingest_pose(FIXTURE.trace[0])
        session.ingest_pose(FIXTURE.trace[1])
        with pytest.raises(ServiceError) as excinfo:
            session.ingest_pose(FIXTURE.trace[0])
        assert excinfo.value.code == "stale_timestamp"
        assert str(FIXTURE.trace[1].timestamp_ms) in excinfo.value.message

    def test_pose_stream_emits_segment_events(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace:
            session.ingest_pose(sample)
        kinds = [e.kind for e in session.events_since(0)]
        assert "segment_opened" in kinds
        opened = [
            e for e in session.events_since(0) if e.kind == "segment_opened"
        ]
        assert opened[0].payload["object_ids"] == ["the_robot"]
        assert any(e.payload["object_ids"] == ["cereal_box"] for e in opened)

    def test_event_sequence_contiguous(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace[:50]:
            session.ingest_pose(sample)
        seqs = [e.seq for e in session.events_since(0)]
        assert seqs == list(range(len(seqs)))

    def test_turn_round_trip(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace:
            session.ingest_pose(sample)
        turn_id, turn = session.submit_utterance(
            FIXTURE.utterance.text, words=FIXTURE.utterance.words, turn_window=FIXTURE.window
        )
        assert turn.status == "completed"
        assert turn.required_objects == ("cereal_box", "bowl")
        assert session.get_turn(turn_id) is turn
        kinds = [e.kind for e in session.events_since(0)]
        assert kinds.count("turn_started") == 1
        assert kinds.count("turn_completed") == 1
        assert "tool_call" in kinds and "tool_result" in kinds and "speak" in kinds

    def test_empty_window_turn_proceeds(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        _, turn = session.submit_utterance("Can you help me?", turn_window=(0.0, 0.0))
        assert turn.status == "clarification_requested"

    def test_busy_rejection_during_turn(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))

        release = threading.Event()
        entered = threading.Event()

        class SlowBackend(HeuristicBackend):
            def complete(self, messages, tools, temperature):
                entered.set()
                release.wait(timeout=5)
                return super().complete(messages, tools, temperature)

        session.agent.backend = SlowBackend()
        results = {}

        def submit():
            results["turn"] = session.submit_utterance("hello", turn_window=(0.0, 0.0))

        worker = threading.Thread(target=submit)
        worker.start()
        assert entered.wait(timeout=5)
        with pytest.raises(ServiceError) as excinfo:
            session.submit_utterance("second", turn_window=(0.0, 0.0))
        assert excinfo.value.code == "turn_in_flight"
        release.set()
        worker.join(timeout=5)
        assert results["turn"][1].status in ("completed", "clarification_requested")

    def test_two_subscribers_see_identical_streams(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace[:15]:
            session.ingest_pose(sample)
        first = [e.to_dict() for e in session.subscribe(0, idle_timeout_s=0.5)]
        second = [e.to_dict() for e in session.subscribe(0, idle_timeout_s=0.5)]
        assert first == second
        assert [e["seq"] for e in first] == list(range(len(first)))

    def test_subscribe_replays_then_follows(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace[:10]:
            session.ingest_pose(sample)
        existing = len(session.events_since(0))
        collected = []
        done = threading.Event()

        def consume():
            for event in session.subscribe(from_seq=0):
                collected.append(event.seq)
                if len(collected) >= existing + 2:
                    done.set()
                    break

        worker = threading.Thread(target=consume, daemon=True)
        worker.start()
        session.ingest_pose(FIXTURE.trace[10])  # two more events
        assert done.wait(timeout=5)
        assert collected == list(range(existing + 2))


class TestServiceBatchEquivalence:
    def test_replayed_trace_equals_offline_pipeline(self):
        manager = SessionManager()
        session = manager.get(new_session(manager))
        for sample in FIXTURE.trace:
            session.ingest_pose(sample)
        _, service_turn = session.submit_utterance(
            FIXTURE.utterance.text, words=FIXTURE.utterance.words, turn_window=FIXTURE.window
        )

        scenario = builtin_scenario("breakfast")
        history = build_gaze_history(FIXTURE.trace, scenario.scene, FIXTURE.window, PARAMS)
        sp = compose(
            Utterance(
                text=FIXTURE.utterance.text,
                turn_window=FIXTURE.window,
                words=FIXTURE.utterance.words,
            ),
            history,
        )
        offline = AgentSession(
            scenario.scene,
            build_tool_registry(EvalCondition(True), actions_enabled=False),
            HeuristicBackend(),
            initial_contents=scenario.contents,
        )
        offline_turn = offline.run_turn(sp)
        assert json.dumps(service_turn.to_dict(), sort_keys=True) == json.dumps(
            offline_turn.to_dict(), sort_keys=True
        )


class TestHttpApi:
    @pytest.fixture
    def client(self) -> TestClient:
        return TestClient(create_app(SessionManager()))

    def create(self, client, **overrides) -> str:
        body = {"scenario": "breakfast", "backend": "heuristic"}
        body.update(overrides)
        response = client.post("/sessions", json=body)
        assert response.status_code == 200, response.text
        return response.json()["session_id"]

    def pose_payload(self, samples):
        return {
            "samples": [
                {
                    "t_ms": s.timestamp_ms,
                    "origin": [s.origin.x, s.origin.y, s.origin.z],
                    "forward": [s.forward.x, s.forward.y, s.forward.z],
                }
                for s in samples
            ]
        }

    def test_create_and_info(self, client):
        sid = self.create(client)
        info = client.get(f"/sessions/{sid}").json()
        assert info["robot_id"] == "the_robot"
        assert len(info["scene"]) == 6
        assert info["params"]["angular_threshold_deg"] == 8.0

    def test_malformed_scene_rejected(self, client):
        response = client.post("/sessions", json={"scene": [], "backend": "heuristic"})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_input"

    def test_unknown_session_404(self, client):
        response = client.get("/sessions/missing")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "session_not_found"

    def test_batched_poses_and_stale_conflict(self, client):
        sid = self.create(client)
        response = client.post(
            f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace[:20])
        )
        assert response.json()["accepted"] == 20
        stale = client.post(
            f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace[:1])
        )
        assert stale.status_code == 409
        assert stale.json()["error"]["code"] == "stale_timestamp"

    def test_full_turn_over_http(self, client):
        sid = self.create(client)
        client.post(f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace))
        response = client.post(
            f"/sessions/{sid}/utterance",
            json={
                "text": FIXTURE.utterance.text,
                "words": [list(w) for w in FIXTURE.utterance.words],
                "turn_window": list(FIXTURE.window),
            },
        )
        body = response.json()
        assert body["transcript"]["status"] == "completed"
        assert body["transcript"]["required_objects"] == ["cereal_box", "bowl"]
        fetched = client.get(f"/sessions/{sid}/turns/{body['turn_id']}").json()
        assert fetched["transcript"] == body["transcript"]

    def test_event_poll_pagination(self, client):
        sid = self.create(client)
        client.post(f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace[:10]))
        first = client.get(f"/sessions/{sid}/events/poll", params={"from_seq": 0, "limit": 5}).json()
        assert [e["seq"] for e in first["events"]] == [0, 1, 2, 3, 4]
        rest = client.get(
            f"/sessions/{sid}/events/poll", params={"from_seq": first["next_seq"]}
        ).json()
        assert rest["events"][0]["seq"] == 5
        all_events = client.get(f"/sessions/{sid}/events/poll", params={"from_seq": 0}).json()
        seqs = [e["seq"] for e in all_events["events"]]
        assert seqs == list(range(len(seqs)))

    def test_sse_stream_replays_then_ends_on_idle(self, client):
        sid = self.create(client)
        client.post(f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace[:5]))
        collected = []
        with client.stream(
            "GET",
            f"/sessions/{sid}/events",
            params={"from_seq": 0, "idle_timeout_s": 1.0},
        ) as response:
            assert response.headers["content-type"].startswith("text/event-stream")
            for line in response.iter_lines():
                if line.startswith("data: "):
                    collected.append(json.loads(line[len("data: "):]))
        seqs = [e["seq"] for e in collected]
        assert seqs[:5] == [0, 1, 2, 3, 4]
        assert seqs == list(range(len(seqs)))

    def test_sse_resume_via_last_event_id(self, client):
        sid = self.create(client)
        client.post(f"/sessions/{sid}/poses", json=self.pose_payload(FIXTURE.trace[:5]))
        collected = []
        with client.stream(
            "GET",
            f"/sessions/{sid}/events",
            params={"idle_timeout_s": 1.0},
            headers={"Last-Event-ID": "3"},
        ) as response:
            for line in response.iter_lines():
                if line.startswith("data: "):
                    collected.append(json.loads(line[len("data: "):]))
        assert collected and collected[0]["seq"] == 4

    def test_builtin_scene_listing(self, client):
        assert client.get("/scenes").json()["scenarios"] == ["breakfast", "drink"]
        scene = client.get("/scenes/breakfast").json()
        assert len(scene["objects"]) == 6
        assert any(t["task_id"] == "T1" for t in scene["tasks"])
