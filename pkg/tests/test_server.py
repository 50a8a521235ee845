import threading

import pytest
import requests

from immunecf import AisParams, SyntheticConfig, generate_synthetic
from immunecf.server import make_server


@pytest.fixture(scope="module")
def api():
    """Live HTTP server over a zero-noise clone store."""
    store = generate_synthetic(SyntheticConfig(2, 6, 20, 20, 0, seed=10))
    ais = AisParams(pool_size=30, k3=0.5, stable_window=150, max_steps=1500)
    server = make_server(store, "127.0.0.1", 0, ais=ais, seed=99)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    base = f"http://{host}:{port}"
    yield base, store
    server.shutdown()
    server.server_close()


def make_session(base, measure=None):
    body = {"measure": measure} if measure else {}
    resp = requests.post(f"{base}/sessions", json=body)
    assert resp.status_code == 201
    return resp.json()["session_id"]


def rate(base, sid, movie_id, vote):
    return requests.put(f"{base}/sessions/{sid}/ratings",
                        json={"movie_id": movie_id, "vote": vote})


def test_full_loop_on_clone_store(api):
    base, store = api
    # rate exactly like cluster 0's preference vector
    cluster_votes = store.profiles["c00_u000"].votes
    sid = make_session(base)
    rated = []
    for movie_id in sorted(cluster_votes)[:6]:
        value = cluster_votes[movie_id].value
        resp = rate(base, sid, movie_id, value)
        assert resp.status_code == 200
        rated.append(movie_id)
    assert resp.json()["status"] == "collecting"

    resp = requests.post(f"{base}/sessions/{sid}/train")
    assert resp.status_code == 200
    trained = resp.json()
    assert trained["status"] == "trained"
    assert trained["pool_size"] > 0
    assert trained["stop_reason"] in ("stable", "exhausted", "max_steps")

    resp = requests.get(f"{base}/sessions/{sid}/recommendations", params={"n": 10})
    assert resp.status_code == 200
    recs = resp.json()["recommendations"]
    assert recs
    scores = [r["score"] for r in recs]
    assert scores == sorted(scores, reverse=True)
    assert all(r["movie_id"] not in rated for r in recs)
    # all survivors are exact clones: every recommendation equals the cluster vote
    for r in recs:
        assert r["score"] == cluster_votes[r["movie_id"]].value

    resp = requests.get(f"{base}/sessions/{sid}/antibodies")
    assert resp.status_code == 200
    rows = resp.json()["antibodies"]
    assert rows
    concentrations = [r["concentration"] for r in rows]
    assert concentrations == sorted(concentrations, reverse=True)
    assert all(r["band"] == "very_good" for r in rows)  # clone affinities are 1.0

    # mutating a rating flips trained -> stale, recommendations lock out
    resp = rate(base, sid, rated[0], 0.0)
    assert resp.json()["status"] == "stale"
    resp = requests.get(f"{base}/sessions/{sid}/recommendations")
    assert resp.status_code == 409
    resp = requests.get(f"{base}/sessions/{sid}/antibodies")
    assert resp.status_code == 409

    # retraining restores service
    assert requests.post(f"{base}/sessions/{sid}/train").status_code == 200
    assert requests.get(f"{base}/sessions/{sid}/recommendations").status_code == 200


def test_session_view_roundtrip(api):
    base, _ = api
    sid = make_session(base, measure="tau")
    rate(base, sid, "m000", 0.8)
    resp = requests.get(f"{base}/sessions/{sid}")
    assert resp.status_code == 200
    view = resp.json()
    assert view["status"] == "collecting"
    assert view["measure"] == "kendall_tau"
    assert view["ratings"] == [{"movie_id": "m000", "vote": 0.8}]


def test_rating_overwrite_allowed_in_session(api):
    base, _ = api
    sid = make_session(base)
    assert rate(base, sid, "m000", 0.8).status_code == 200
    resp = rate(base, sid, "m000", 0.2)  # in-session change of mind is fine
    assert resp.status_code == 200
    assert resp.json()["ratings"] == [{"movie_id": "m000", "vote": 0.2}]


def test_train_without_ratings_is_422(api):
    base, _ = api
    sid = make_session(base)
    resp = requests.post(f"{base}/sessions/{sid}/train")
    assert resp.status_code == 422
    assert "ineligible" in resp.json()["error"]


def test_recommendations_before_training_is_409(api):
    base, _ = api
    sid = make_session(base)
    assert requests.get(f"{base}/sessions/{sid}/recommendations").status_code == 409


def test_unknown_session_and_movie_are_404(api):
    base, _ = api
    assert requests.get(f"{base}/sessions/{'0' * 32}").status_code == 404
    sid = make_session(base)
    assert rate(base, sid, "no_such_movie", 0.8).status_code == 404


def test_invalid_votes_are_422(api):
    base, _ = api
    sid = make_session(base)
    assert rate(base, sid, "m000", 0.35).status_code == 422
    assert rate(base, sid, "m000", "high").status_code == 422
    assert rate(base, sid, "m000", 1.4).status_code == 422
    resp = requests.put(f"{base}/sessions/{sid}/ratings", json={"movie_id": "m000"})
    assert resp.status_code == 422


def test_bad_measure_is_422(api):
    base, _ = api
    resp = requests.post(f"{base}/sessions", json={"measure": "cosine"})
    assert resp.status_code == 422


def test_movie_search(api):
    base, _ = api
    resp = requests.get(f"{base}/movies", params={"query": "movie 001"})
    assert resp.status_code == 200
    movies = resp.json()["movies"]
    assert movies == [{"movie_id": "m001", "title": "Synthetic movie 001"}]
    everything = requests.get(f"{base}/movies").json()["movies"]
    assert len(everything) == 20


def test_bad_json_body_is_400(api):
    base, _ = api
    sid = make_session(base)
    resp = requests.put(f"{base}/sessions/{sid}/ratings", data="not json",
                        headers={"Content-Type": "application/json"})
    assert resp.status_code == 400
