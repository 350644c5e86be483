import json

import pytest
from fastapi.testclient import TestClient

import slt.fixtures as fx
from slt.service import ServiceConfig, Workbench, create_app
from slt.treebanker import TreebankStore


@pytest.fixture()
def workdir(tmp_path):
    grammar_path = tmp_path / "atis.slt"
    grammar_path.write_text(fx.grammar_text(), encoding="utf-8")
    bl_path = tmp_path / "atis.bl"
    bl_path.write_text(fx._read("atis.bl"), encoding="utf-8")
    prefs_path = tmp_path / "prefs.jsonl"
    prefs_path.write_text(fx._read("atis_prefs.jsonl"), encoding="utf-8")
    sentences = tmp_path / "sentences.txt"
    sentences.write_text("\n".join([
        "show me the flights to boston",
        "give me the fares from boston to denver",
        "list the fares",
    ]), encoding="utf-8")
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("\n".join(fx.corpus_utterances(60)), encoding="utf-8")
    return tmp_path


@pytest.fixture()
def config(workdir):
    return ServiceConfig(
        data_dir=str(workdir / "data"),
        grammar_path=str(workdir / "atis.slt"),
        bilingual_path=str(workdir / "atis.bl"),
        prefs_path=str(workdir / "prefs.jsonl"),
        sentences_path=str(workdir / "sentences.txt"),
        corpus_path=str(workdir / "corpus.txt"),
    )


@pytest.fixture()
def client(config):
    return TestClient(create_app(config))


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok" and body["grammar"]


def test_parse_four_stages(client):
    r = client.post("/parse", json={"text": "show me the flights to boston"})
    assert r.status_code == 200
    stages = r.json()["stages"]
    assert [s["stage"] for s in stages] == ["raw", "lexical", "phrasal", "full"]
    assert len(stages[3]["fragments"]) == 1


def test_parse_lattice_payload(client):
    lattice = {"vertices": 3, "edges": [
        {"from": 0, "to": 1, "word": "list", "acoustic": -1.0},
        {"from": 1, "to": 2, "word": "fares", "acoustic": -1.0},
    ]}
    r = client.post("/parse", json={"lattice": lattice})
    assert r.status_code == 200


def test_parse_validation_error(client):
    r = client.post("/parse", json={})
    assert r.status_code == 422
    assert r.json()["code"] == "bad-request"


def test_translate_iterations(client):
    r = client.post("/translate", json={"text": "show me the cheap flights"})
    assert r.status_code == 200
    iters = r.json()["iterations"]
    scores = [i["score"] for i in iters]
    assert scores == sorted(scores)
    assert iters[-1]["text"] == "montrez moi les vols bonmarche"


def test_sentences_list_and_filter(client):
    r = client.get("/sentences")
    sentences = r.json()["sentences"]
    assert len(sentences) == 3
    opens = client.get("/sentences", params={"status": "open"}).json()["sentences"]
    assert all(s["status"] == "open" for s in opens)


def test_judgment_flow_with_propagation(client):
    rows = client.get("/sentences/0/discriminants").json()
    target = next(d for d in rows["discriminants"]
                  if d["key"] == "triple:flights+to+boston")
    r = client.post("/sentences/0/judgments",
                    json={"discriminant": target["key"], "verdict": "correct"})
    assert r.status_code == 200
    body = r.json()
    assert body["remaining"] == 1
    assert body["status"] == "resolved-unique"
    assert "triple:show+to+boston" in body["propagated"]


def test_judgment_conflict_409(client):
    key = "triple:flights+to+boston"
    client.post("/sentences/0/judgments", json={"discriminant": key, "verdict": "correct"})
    r = client.post("/sentences/0/judgments", json={"discriminant": key, "verdict": "correct"})
    assert r.status_code == 409


def test_stale_version_409(client):
    key = "triple:flights+to+boston"
    r1 = client.post("/sentences/0/judgments",
                     json={"discriminant": key, "verdict": "correct", "version": 0})
    assert r1.status_code == 200
    r2 = client.post("/sentences/0/judgments",
                     json={"discriminant": "constituent:NP:the flights to boston",
                           "verdict": "correct", "version": 0})
    assert r2.status_code == 409


def test_at_most_once_request_ids(client):
    key = "triple:flights+to+boston"
    body = {"discriminant": key, "verdict": "correct", "request_id": "r-7"}
    r1 = client.post("/sentences/0/judgments", json=body)
    r2 = client.post("/sentences/0/judgments", json=body)
    assert r1.status_code == 200 and r2.status_code == 200
    view = client.get("/sentences/0/discriminants").json()["sentence"]
    assert view["remaining"] == 1


def test_undo_endpoint(client):
    key = "triple:flights+to+boston"
    client.post("/sentences/0/judgments", json={"discriminant": key, "verdict": "correct"})
    r = client.post("/sentences/0/undo", json={})
    assert r.status_code == 200
    assert r.json()["status"] == "open"


def test_resolve_endpoint(client):
    key = "triple:flights+to+boston"
    client.post("/sentences/0/judgments", json={"discriminant": key, "verdict": "correct"})
    r = client.post("/sentences/0/resolve", json={"mode": "unique-required"})
    assert r.status_code == 200
    assert len(r.json()["approved"]) == 1


def test_resolve_unresolved_422(client):
    r = client.post("/sentences/0/resolve", json={"mode": "unique-required"})
    assert r.status_code == 422


def test_classes_and_edits(client):
    classes = client.get("/classes").json()["classes"]
    assert classes
    big = max(classes, key=lambda c: len(c["members"]))
    member = big["members"][0]["ref"]
    small = min((c for c in classes if c["id"] != big["id"]),
                key=lambda c: len(c["members"]))
    r = client.post("/classes/edits", json={"edits": [
        {"op": "move", "member": member, "from": big["id"], "to": small["id"]}]})
    assert r.status_code == 200
    updated = {c["id"]: c for c in r.json()["classes"]}
    assert len(updated[small["id"]]["members"]) == len(small["members"]) + 1


def test_bad_edit_422(client):
    r = client.post("/classes/edits", json={"edits": [
        {"op": "move", "member": "nope.9", "from": "c0000", "to": "c0001"}]})
    assert r.status_code == 422


def test_subcorpus_report(client):
    r = client.get("/subcorpus/report")
    assert r.status_code == 200
    rows = r.json()["rows"]
    sizes = [row["size"] for row in rows]
    assert sizes == sorted(sizes, reverse=True)


def test_train_endpoints(client):
    client.post("/sentences/2/resolve", json={"mode": "accept-set"})
    key = "triple:flights+to+boston"
    client.post("/sentences/0/judgments", json={"discriminant": key, "verdict": "correct"})
    client.post("/sentences/0/resolve", json={"mode": "unique-required"})
    r = client.post("/train/prune", json={})
    assert r.status_code == 200 and r.json()["discriminants"] > 0
    r2 = client.post("/train/specialize", json={"cuts": ["NP"]})
    assert r2.status_code == 200 and r2.json()["macros"] > 0


def test_crash_recovery_bit_identical(config):
    app = create_app(config)
    with TestClient(app) as client:
        key = "triple:flights+to+boston"
        client.post("/sentences/0/judgments",
                    json={"discriminant": key, "verdict": "correct", "ts": 1.0})
        client.post("/sentences/0/resolve", json={"mode": "unique-required"})
        rows = client.get("/sentences/1/discriminants").json()["discriminants"]
        client.post("/sentences/1/judgments",
                    json={"discriminant": rows[0]["key"], "verdict": "correct",
                          "ts": 2.0})
        bench = app.state.workbench
        before = {sid: json.dumps(s.state.to_json(), sort_keys=True)
                  for sid, s in bench.store.sessions.items()}
    # simulate a crash: rebuild everything from the on-disk log alone
    replayed = TreebankStore(bench.store.log_path)
    after = {sid: json.dumps(s.state.to_json(), sort_keys=True)
             for sid, s in replayed.sessions.items()}
    assert after == before


def test_service_restart_preserves_classes(config):
    app = create_app(config)
    client = TestClient(app)
    classes = client.get("/classes").json()["classes"]
    big = max(classes, key=lambda c: len(c["members"]))
    small = min((c for c in classes if c["id"] != big["id"]),
                key=lambda c: len(c["members"]))
    client.post("/classes/edits", json={"edits": [
        {"op": "move", "member": big["members"][0]["ref"],
         "from": big["id"], "to": small["id"]}]})
    snapshot = client.get("/classes").json()
    app2 = create_app(config)
    client2 = TestClient(app2)
    assert client2.get("/classes").json() == snapshot


def test_translate_lattice_and_time_limit(client):
    lattice = {"vertices": 3, "edges": [
        {"from": 0, "to": 1, "word": "list", "acoustic": -1.0},
        {"from": 1, "to": 2, "word": "fares", "acoustic": -1.5},
        {"from": 1, "to": 2, "word": "fare", "acoustic": -2.0},
    ]}
    r = client.post("/translate", json={"lattice": lattice, "time_limit": 5000})
    assert r.status_code == 200
    assert r.json()["iterations"][0]["stage"] == "raw"


def test_translate_bad_time_limit(client):
    r = client.post("/translate", json={"text": "list the fares", "time_limit": 0})
    assert r.status_code == 422
