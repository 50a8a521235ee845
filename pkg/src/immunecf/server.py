"""HTTP session API: rate movies, train a network, read recommendations.

Sessions are in-memory with idle expiry. A session holds one antigen built
from submitted ratings and moves collecting -> trained -> stale (any rating
change after training marks it stale until retrained). Recommendations and
the antibody view are served only from trained sessions.
"""

from __future__ import annotations

import json
import re
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .affinity import AffinityMeasure, agreement_strength
from .data import Profile, id_order, normalize_vote
from .errors import NoEligibleCandidates, OutOfScaleError
from .network import AisParams, init_network
from .recommend import recommend_top_n

COLLECTING = "collecting"
TRAINED = "trained"
STALE = "stale"


class ApiError(Exception):
    def __init__(self, status, message):
        self.status = status
        super().__init__(message)


class Session:
    def __init__(self, session_id, measure, seed):
        self.session_id = session_id
        self.measure = measure
        self.seed = seed
        self.votes = {}  # movie_id -> VoteCategory
        self.status = COLLECTING
        self.network = None
        self.train_count = 0
        self.created_at = time.monotonic()
        self.updated_at = self.created_at
        self.lock = threading.Lock()

    def view(self):
        return {
            "session_id": self.session_id,
            "status": self.status,
            "measure": self.measure.kind,
            "ratings": [{"movie_id": m, "vote": v.value}
                        for m, v in sorted(self.votes.items(), key=lambda kv: id_order(kv[0]))],
        }


class RecommenderService:
    """Shared immutable store + mutable session table."""

    def __init__(self, store, ais=None, seed=0, session_ttl=3600.0):
        self.store = store
        self.ais = ais or AisParams()
        self.session_ttl = session_ttl
        self.sessions = {}
        self.known_movies = set(store.movie_ids())
        self._rng = np.random.default_rng(seed)
        self._table_lock = threading.Lock()

    # --- session table ---

    def _sweep(self, now):
        dead = [sid for sid, s in self.sessions.items()
                if now - s.updated_at > self.session_ttl]
        for sid in dead:
            del self.sessions[sid]

    def create_session(self, measure_name):
        try:
            measure = AffinityMeasure(kind=measure_name or "kappa")
        except ValueError as exc:
            raise ApiError(422, str(exc)) from None
        with self._table_lock:
            now = time.monotonic()
            self._sweep(now)
            session_id = uuid.uuid4().hex
            seed = int(self._rng.integers(0, 2**63))
            session = Session(session_id, measure, seed)
            self.sessions[session_id] = session
        return session

    def get_session(self, session_id) -> Session:
        with self._table_lock:
            now = time.monotonic()
            self._sweep(now)
            session = self.sessions.get(session_id)
            if session is None:
                raise ApiError(404, f"unknown session {session_id!r}")
            session.updated_at = now
            return session

    # --- session operations (caller holds session.lock) ---

    def put_rating(self, session, movie_id, vote):
        if movie_id not in self.known_movies:
            raise ApiError(404, f"unknown movie {movie_id!r}")
        if not isinstance(vote, (int, float)) or isinstance(vote, bool):
            raise ApiError(422, f"vote must be a number, got {vote!r}")
        try:
            category = normalize_vote(float(vote), "unit")
        except OutOfScaleError:
            raise ApiError(422, f"vote {vote!r} is not one of 0, 0.2, 0.4, 0.6, 0.8, 1") from None
        session.votes[movie_id] = category
        if session.status == TRAINED:
            session.status = STALE
        return session.view()

    def train(self, session):
        if len(session.votes) < session.measure.min_common:
            raise ApiError(422, f"antigen ineligible: rate at least "
                                f"{session.measure.min_common} movies first")
        antigen = Profile(f"session:{session.session_id}", dict(session.votes))
        params = self.ais.with_seed((session.seed + session.train_count) % 2**63)
        session.train_count += 1
        try:
            network = init_network(antigen, self.store, session.measure, params)
        except NoEligibleCandidates as exc:
            raise ApiError(422, f"antigen ineligible: {exc}") from None
        network.run_to_convergence()
        session.network = network
        session.status = TRAINED
        return {
            "pool_size": network.pool_size,
            "steps": network.steps_taken,
            "stop_reason": network.stop_reason,
            "status": session.status,
        }

    def recommendations(self, session, n):
        if session.status != TRAINED:
            raise ApiError(409, f"session is {session.status}; train first")
        out = []
        for p in recommend_top_n(session.network, n, exclude_seen=True):
            out.append({
                "movie_id": p.movie_id,
                "title": self.store.movies.get(p.movie_id),
                "score": p.score,
                "rounded": p.rounded.value,
                "rounded_index": p.rounded.index,
                "support": p.support,
            })
        return {"recommendations": out}

    def antibodies(self, session):
        if session.status != TRAINED:
            raise ApiError(409, f"session is {session.status}; train first")
        out = []
        for ab in session.network.antibodies():
            out.append({
                "person_id": ab.person_id,
                "concentration": ab.concentration,
                "affinity": ab.affinity,
                "band": agreement_strength(max(min(ab.affinity, 1.0), -1.0),
                                           session.measure.kind),
            })
        return {"antibodies": out}

    def search_movies(self, query, limit=50):
        query = (query or "").strip().lower()
        rows = []
        for movie_id in sorted(self.known_movies, key=id_order):
            title = self.store.movies.get(movie_id)
            hay = f"{movie_id} {title or ''}".lower()
            if query and query not in hay:
                continue
            rows.append({"movie_id": movie_id, "title": title})
            if len(rows) >= limit:
                break
        return {"movies": rows}


_SESSION_PATH = re.compile(r"^/sessions/([0-9a-f]{32})(/(?:ratings|train|recommendations|antibodies))?$")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    service: RecommenderService = None  # set by make_server

    # --- plumbing ---

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, status, payload):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status, message):
        self._send(status, {"error": message})

    def _body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError:
            raise ApiError(400, "request body is not valid JSON") from None
        if not isinstance(doc, dict):
            raise ApiError(400, "request body must be a JSON object")
        return doc

    def _query(self):
        if "?" not in self.path:
            return self.path, {}
        path, _, qs = self.path.partition("?")
        params = {}
        for part in qs.split("&"):
            if "=" in part:
                key, _, value = part.partition("=")
                from urllib.parse import unquote_plus
                params[unquote_plus(key)] = unquote_plus(value)
        return path, params

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def _dispatch(self, method):
        service = self.service
        path, query = self._query()
        try:
            if method == "POST" and path == "/sessions":
                session = service.create_session(self._body().get("measure"))
                self._send(201, {"session_id": session.session_id})
                return
            if method == "GET" and path == "/movies":
                self._send(200, service.search_movies(query.get("query", "")))
                return
            match = _SESSION_PATH.match(path)
            if not match:
                raise ApiError(404, f"no such resource {path!r}")
            session = service.get_session(match.group(1))
            tail = match.group(2) or ""
            with session.lock:
                if method == "GET" and tail == "":
                    self._send(200, session.view())
                elif method == "PUT" and tail == "/ratings":
                    body = self._body()
                    if "movie_id" not in body or "vote" not in body:
                        raise ApiError(422, "body must carry movie_id and vote")
                    self._send(200, service.put_rating(session, body["movie_id"], body["vote"]))
                elif method == "POST" and tail == "/train":
                    self._send(200, service.train(session))
                elif method == "GET" and tail == "/recommendations":
                    try:
                        n = int(query.get("n", "10"))
                    except ValueError:
                        raise ApiError(422, "n must be an integer") from None
                    if n < 1:
                        raise ApiError(422, "n must be positive")
                    self._send(200, service.recommendations(session, n))
                elif method == "GET" and tail == "/antibodies":
                    self._send(200, service.antibodies(session))
                else:
                    raise ApiError(405, f"{method} not supported on {path!r}")
        except ApiError as exc:
            self._error(exc.status, str(exc))

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")


def make_server(store, host="127.0.0.1", port=0, ais=None, seed=0,
                session_ttl=3600.0) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = RecommenderService(store, ais=ais, seed=seed, session_ttl=session_ttl)
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def run_server(store, host, port, ais=None, seed=0, session_ttl=3600.0):
    server = make_server(store, host, port, ais=ais, seed=seed, session_ttl=session_ttl)
    host_shown, port_shown = server.server_address[:2]
    print(f"immunecf API listening on http://{host_shown}:{port_shown}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
