// Document wiring: owns the poll loop and event handlers, delegates all state
// transitions to state.ts and all markup to render.ts.

import { ServiceClient } from "./api.js";
import { renderBoard } from "./render.js";
import {
  ClusterBoardState,
  attachVerdict,
  initialState,
  submitClaim,
  syncBoard,
} from "./state.js";

const POLL_INTERVAL_MS = 5000;

function serviceBaseUrl(): string {
  // runtime setting: ?service=http://host:port, else same origin
  const param = new URLSearchParams(window.location.search).get("service");
  return (param ?? window.location.origin).replace(/\/$/, "");
}

function start(): void {
  const board = document.getElementById("board");
  const form = document.getElementById("submit-form") as HTMLFormElement | null;
  const input = document.getElementById("claim-text") as HTMLInputElement | null;
  if (!board || !form || !input) {
    console.error("missing board skeleton elements");
    return;
  }
  const client = new ServiceClient(serviceBaseUrl());
  let state: ClusterBoardState = initialState();
  let timer: number | undefined;

  const paint = () => {
    board.innerHTML = renderBoard(state);
    // keep the input in sync so a failed submit never loses the typed text
    if (input.value !== state.pendingText) input.value = state.pendingText;
  };

  const schedule = () => {
    window.clearTimeout(timer);
    const delay = state.offline ? state.retryDelayMs : POLL_INTERVAL_MS;
    timer = window.setTimeout(tick, delay);
  };

  const tick = async () => {
    state = await syncBoard(client, state);
    paint();
    schedule();
  };

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    state = { ...state, pendingText: input.value };
    state = await submitClaim(client, state);
    paint();
  });

  input.addEventListener("input", () => {
    state = { ...state, pendingText: input.value };
  });

  board.addEventListener("click", async (ev) => {
    const target = ev.target as HTMLElement;
    const row = target.closest<HTMLElement>(".cluster-row");
    if (row?.dataset.cluster) {
      const view = await client.cluster(Number(row.dataset.cluster));
      state = { ...state, selected: view, similar: [] };
      paint();
      return;
    }
    const claim = target.closest<HTMLElement>(".claim");
    if (claim?.dataset.claim) {
      const verdict = window.prompt("verdict (true/false/misleading/unverifiable):");
      if (!verdict) return;
      const note = window.prompt("note:") ?? "";
      state = await attachVerdict(client, state, claim.dataset.claim, verdict, note);
      paint();
    }
  });

  void tick();
}

document.addEventListener("DOMContentLoaded", start);
