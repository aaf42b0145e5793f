/** DOM wiring: player controls, rating card, preference sliders, stats. */

import { ApiError, RadioApi, type NextSongResponse } from "./api.js";
import { Player } from "./player.js";
import { AnswerOutbox, RatingFlow } from "./ratingFlow.js";
import {
  DEFAULT_WEIGHTS,
  PREFERENCE_KEYS,
  PreferencePanel,
  type PreferenceKey,
} from "./preferences.js";
import { correlationTable, summaryRows } from "./stats.js";

const api = new RadioApi();
const player = new Player();
const outbox = new AnswerOutbox((songId, question, stars) => api.rate(songId, question, stars));

let nowPlaying: NextSongResponse | null = null;
let flow: RatingFlow | null = null;

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
};

function setStatus(text: string): void {
  el("status").textContent = text;
}

function renderQuestion(): void {
  const card = el("question-card");
  if (!flow || flow.done) {
    card.hidden = true;
    el("rated-note").hidden = !flow;
    return;
  }
  el("rated-note").hidden = true;
  card.hidden = false;
  const question = flow.current()!;
  el("question-text").textContent = nowPlaying?.question_text[question] ?? question;
  el("question-progress").textContent = `${flow.answered + 1} / ${flow.questionOrder.length}`;
}

async function playNext(): Promise<void> {
  try {
    nowPlaying = await api.nextSong();
  } catch (err) {
    if (err instanceof ApiError && err.code === "catalog_empty") {
      setStatus("No songs yet — ask an admin to submit a prime.");
      return;
    }
    setStatus("Could not reach the station.");
    return;
  }
  const { song, audio_url, question_order } = nowPlaying;
  setStatus(`Now playing: ${song.artist_prompt} × ${song.genre_prompt} (${song.song_id})`);
  flow = new RatingFlow(song.song_id, question_order, outbox);
  renderQuestion();
  void player.play(api.audioUrl(audio_url), () => void playNext());
}

function wireRating(): void {
  document.querySelectorAll<HTMLButtonElement>("#stars button").forEach((button) => {
    button.addEventListener("click", () => {
      if (!flow || flow.done) return;
      flow.answer(Number(button.dataset.stars)).catch(() => {
        setStatus("Rating could not be delivered; it will be retried.");
      });
      renderQuestion();
    });
  });
  el("skip-question").addEventListener("click", () => {
    flow?.skip();
    renderQuestion();
  });
}

function wirePreferences(panel: PreferencePanel): void {
  for (const key of PREFERENCE_KEYS) {
    const slider = el<HTMLInputElement>(`pref-${key}`);
    const label = el(`pref-${key}-value`);
    slider.addEventListener("input", () => {
      panel.set(key, Number(slider.value));
      label.textContent = Number(slider.value).toFixed(1);
    });
    slider.addEventListener("change", () => panel.commit());
  }
}

function syncSliders(weights: Record<PreferenceKey, number>): void {
  for (const key of PREFERENCE_KEYS) {
    el<HTMLInputElement>(`pref-${key}`).value = String(weights[key]);
    el(`pref-${key}-value`).textContent = weights[key].toFixed(1);
  }
}

async function refreshStats(): Promise<void> {
  const report = await api.stats();
  const summaries = el("summaries");
  summaries.innerHTML = "";
  for (const row of summaryRows(report)) {
    const tr = document.createElement("tr");
    tr.innerHTML = `<td>${row.question}</td><td>${row.count}</td><td>${row.mean}</td><td>${row.stddev}</td><td>${row.histogram}</td>`;
    summaries.appendChild(tr);
  }
  const table = correlationTable(report);
  const corr = el("correlations");
  corr.innerHTML =
    `<tr><th></th>${table.questions.map((q) => `<th>${q}</th>`).join("")}</tr>` +
    table.cells
      .map(
        (row, i) =>
          `<tr><th>${table.questions[i]}</th>${row.map((c) => `<td>${c}</td>`).join("")}</tr>`,
      )
      .join("");
}

async function init(): Promise<void> {
  wireRating();
  el("play-next").addEventListener("click", () => void playNext());
  el("refresh-stats").addEventListener("click", () => void refreshStats());

  let weights = DEFAULT_WEIGHTS;
  try {
    weights = await api.getPreferences();
  } catch {
    // server unreachable; keep defaults and let later actions surface errors
  }
  const panel = new PreferencePanel(weights, {
    put: (w) => api.putPreferences(w),
    onSaved: () => setStatus("Preferences saved."),
    onError: () => setStatus("Preferences could not be saved."),
  });
  syncSliders(weights);
  wirePreferences(panel);
  void refreshStats();
}

document.addEventListener("DOMContentLoaded", () => void init());
