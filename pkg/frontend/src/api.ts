// Typed client for the immunecf session API. The UI never computes scores,
// affinities, or band labels itself; everything shown comes back from here.

export interface MovieRow {
  movie_id: string;
  title: string | null;
}

export interface RatingRow {
  movie_id: string;
  vote: number;
}

export type SessionStatus = "collecting" | "trained" | "stale";

export interface SessionView {
  session_id: string;
  status: SessionStatus;
  measure: string;
  ratings: RatingRow[];
}

export interface TrainResult {
  pool_size: number;
  steps: number;
  stop_reason: string;
  status: SessionStatus;
}

export interface Recommendation {
  movie_id: string;
  title: string | null;
  score: number;
  rounded: number;
  rounded_index: number;
  support: number;
}

export interface AntibodyRow {
  person_id: string;
  concentration: number;
  affinity: number;
  band: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const res = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  let body: any = null;
  try {
    body = await res.json();
  } catch {
    // non-JSON error bodies fall through to the status message
  }
  if (!res.ok) {
    throw new ApiError(res.status, body?.error ?? `HTTP ${res.status}`);
  }
  return body as T;
}

export class ApiClient {
  constructor(public baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  createSession(measure?: string): Promise<{ session_id: string }> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify(measure ? { measure } : {}),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions/${sessionId}`);
  }

  putRating(sessionId: string, movieId: string, vote: number): Promise<SessionView> {
    return request(`${this.baseUrl}/sessions/${sessionId}/ratings`, {
      method: "PUT",
      body: JSON.stringify({ movie_id: movieId, vote }),
    });
  }

  train(sessionId: string): Promise<TrainResult> {
    return request(`${this.baseUrl}/sessions/${sessionId}/train`, { method: "POST" });
  }

  recommendations(sessionId: string, n = 10): Promise<{ recommendations: Recommendation[] }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/recommendations?n=${n}`);
  }

  antibodies(sessionId: string): Promise<{ antibodies: AntibodyRow[] }> {
    return request(`${this.baseUrl}/sessions/${sessionId}/antibodies`);
  }

  searchMovies(query: string): Promise<{ movies: MovieRow[] }> {
    return request(`${this.baseUrl}/movies?query=${encodeURIComponent(query)}`);
  }
}

// API base resolution: ?api=... beats a saved value beats the default port.
export function resolveApiBase(win: Pick<Window, "location" | "localStorage">): string {
  const fromQuery = new URLSearchParams(win.location.search).get("api");
  if (fromQuery) {
    win.localStorage.setItem("immunecf-api", fromQuery);
    return fromQuery;
  }
  return win.localStorage.getItem("immunecf-api") ?? "http://127.0.0.1:8765";
}
