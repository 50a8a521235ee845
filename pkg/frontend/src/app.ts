// DOM wiring for the rate -> train -> recommend loop. Pure client: every
// number and label rendered here arrived verbatim from the API.

import {
  AntibodyRow,
  ApiClient,
  ApiError,
  MovieRow,
  Recommendation,
  SessionStatus,
  SessionView,
} from "./api";

const STOP_VALUES = [0, 0.2, 0.4, 0.6, 0.8, 1];

function mustFind<T extends Element>(root: ParentNode, selector: string): T {
  const el = root.querySelector(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el as T;
}

export class App {
  private sessionId = "";
  private selectedMovie: MovieRow | null = null;
  private selectedStop: number | null = null; // category index 1..6
  private status: SessionStatus | null = null;
  private training = false;

  private searchBox: HTMLInputElement;
  private searchResults: HTMLUListElement;
  private selectedLabel: HTMLElement;
  private stopButtons: HTMLButtonElement[];
  private rateButton: HTMLButtonElement;
  private trainButton: HTMLButtonElement;
  private trainInfo: HTMLElement;
  private statusBadge: HTMLElement;
  private sessionLabel: HTMLElement;
  private errorBox: HTMLElement;
  private ratingsBody: HTMLElement;
  private recsBody: HTMLElement;
  private recsStaleNote: HTMLElement;
  private antibodiesBody: HTMLElement;
  private antibodiesHint: HTMLElement;

  constructor(private doc: Document, private api: ApiClient) {
    this.searchBox = mustFind(doc, "#search-box");
    this.searchResults = mustFind(doc, "#search-results");
    this.selectedLabel = mustFind(doc, "#selected-movie");
    this.stopButtons = Array.from(doc.querySelectorAll("#vote-stops button"));
    this.rateButton = mustFind(doc, "#rate-button");
    this.trainButton = mustFind(doc, "#train-button");
    this.trainInfo = mustFind(doc, "#train-info");
    this.statusBadge = mustFind(doc, "#status-badge");
    this.sessionLabel = mustFind(doc, "#session-id");
    this.errorBox = mustFind(doc, "#error-box");
    this.ratingsBody = mustFind(doc, "#ratings-body");
    this.recsBody = mustFind(doc, "#recs-body");
    this.recsStaleNote = mustFind(doc, "#recs-stale-note");
    this.antibodiesBody = mustFind(doc, "#antibodies-body");
    this.antibodiesHint = mustFind(doc, "#antibodies-hint");

    this.searchBox.addEventListener("input", () => {
      void this.search(this.searchBox.value);
    });
    for (const button of this.stopButtons) {
      button.addEventListener("click", () => {
        this.selectStop(Number(button.dataset.index));
      });
    }
    this.rateButton.addEventListener("click", () => {
      void this.rateSelected();
    });
    this.trainButton.addEventListener("click", () => {
      void this.train();
    });
  }

  async init(): Promise<void> {
    const { session_id } = await this.api.createSession();
    this.sessionId = session_id;
    this.sessionLabel.textContent = session_id.slice(0, 8);
    this.setStatus("collecting");
    this.renderRatings([]);
    await this.search("");
  }

  // --- rating flow ---

  async search(query: string): Promise<void> {
    const { movies } = await this.api.searchMovies(query);
    this.searchResults.replaceChildren();
    for (const movie of movies.slice(0, 12)) {
      const item = this.doc.createElement("li");
      item.textContent = movie.title ?? movie.movie_id;
      item.dataset.movieId = movie.movie_id;
      item.addEventListener("click", () => this.selectMovie(movie));
      this.searchResults.appendChild(item);
    }
  }

  selectMovie(movie: MovieRow): void {
    this.selectedMovie = movie;
    this.selectedLabel.textContent = movie.title ?? movie.movie_id;
    this.updateControls();
  }

  selectStop(index: number): void {
    this.selectedStop = index;
    for (const button of this.stopButtons) {
      button.classList.toggle("selected", Number(button.dataset.index) === index);
    }
    this.updateControls();
  }

  async rateSelected(): Promise<void> {
    if (!this.selectedMovie || this.selectedStop === null) return; // control is disabled anyway
    this.clearError();
    try {
      const view = await this.api.putRating(
        this.sessionId,
        this.selectedMovie.movie_id,
        STOP_VALUES[this.selectedStop - 1],
      );
      this.applySessionView(view);
    } catch (err) {
      this.showError(err);
    }
  }

  async train(): Promise<void> {
    if (this.training) return; // one in-flight train at most
    this.training = true;
    this.trainButton.disabled = true;
    this.clearError();
    try {
      const result = await this.api.train(this.sessionId);
      this.trainInfo.textContent =
        `pool ${result.pool_size}, ${result.steps} steps, stopped: ${result.stop_reason}`;
      // fill the tables before flipping the badge so "trained" means ready
      await this.refreshOutputs();
      this.setStatus(result.status);
    } catch (err) {
      this.showError(err);
    } finally {
      this.training = false;
      this.updateControls();
    }
  }

  async refreshOutputs(): Promise<void> {
    try {
      const [recs, antibodies] = await Promise.all([
        this.api.recommendations(this.sessionId),
        this.api.antibodies(this.sessionId),
      ]);
      this.renderRecommendations(recs.recommendations);
      this.renderAntibodies(antibodies.antibodies);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.antibodiesHint.textContent = "Train first to see who is recommending.";
        this.antibodiesHint.style.display = "";
        return;
      }
      this.showError(err);
    }
  }

  // --- rendering ---

  private applySessionView(view: SessionView): void {
    this.setStatus(view.status);
    this.renderRatings(view.ratings);
  }

  private setStatus(status: SessionStatus): void {
    this.status = status;
    this.statusBadge.textContent = status;
    this.statusBadge.className = status;
    this.recsStaleNote.style.display = status === "stale" ? "block" : "none";
    this.updateControls();
  }

  private updateControls(): void {
    this.rateButton.disabled = !this.selectedMovie || this.selectedStop === null;
    const hasRatings = this.ratingsBody.children.length > 0;
    this.trainButton.disabled = this.training || !hasRatings || this.status === "trained";
  }

  private renderRatings(ratings: { movie_id: string; vote: number }[]): void {
    this.ratingsBody.replaceChildren();
    for (const rating of ratings) {
      const row = this.doc.createElement("tr");
      row.dataset.movieId = rating.movie_id;
      const movieCell = this.doc.createElement("td");
      movieCell.textContent = rating.movie_id;
      const voteCell = this.doc.createElement("td");
      voteCell.textContent = String(rating.vote);
      row.append(movieCell, voteCell);
      this.ratingsBody.appendChild(row);
    }
    this.updateControls();
  }

  private renderRecommendations(recs: Recommendation[]): void {
    this.recsBody.replaceChildren();
    for (const rec of recs) {
      const row = this.doc.createElement("tr");
      row.dataset.movieId = rec.movie_id;
      row.dataset.score = String(rec.score);
      const cells = [
        rec.title ?? rec.movie_id,
        rec.score.toFixed(3),
        `${rec.rounded_index}/6`,
        String(rec.support),
      ];
      for (const text of cells) {
        const cell = this.doc.createElement("td");
        cell.textContent = text;
        row.appendChild(cell);
      }
      this.recsBody.appendChild(row);
    }
  }

  private renderAntibodies(rows: AntibodyRow[]): void {
    this.antibodiesHint.style.display = "none";
    this.antibodiesBody.replaceChildren();
    const peak = rows.length ? rows[0].concentration : 1;
    for (const ab of rows) {
      const row = this.doc.createElement("tr");
      row.dataset.concentration = String(ab.concentration);
      const person = this.doc.createElement("td");
      person.textContent = ab.person_id;
      const concentration = this.doc.createElement("td");
      concentration.textContent = ab.concentration.toFixed(3);
      const barCell = this.doc.createElement("td");
      const bar = this.doc.createElement("span");
      bar.className = "bar";
      bar.style.width = `${peak > 0 ? (100 * ab.concentration) / peak : 0}px`;
      barCell.appendChild(bar);
      const affinity = this.doc.createElement("td");
      affinity.textContent = ab.affinity.toFixed(3);
      const band = this.doc.createElement("td");
      band.textContent = ab.band.replace("_", " ");
      row.append(person, concentration, barCell, affinity, band);
      this.antibodiesBody.appendChild(row);
    }
  }

  private clearError(): void {
    this.errorBox.textContent = "";
  }

  private showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.errorBox.textContent = `error ${err.status}: ${err.message}`;
    } else {
      this.errorBox.textContent = String(err);
    }
  }

  // test hooks: the scripted UI test reads these instead of private fields
  get currentStatus(): SessionStatus | null {
    return this.status;
  }

  get currentSessionId(): string {
    return this.sessionId;
  }
}
