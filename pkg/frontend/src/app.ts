/** Single-page annotation app: wire the API client and state to the DOM. */

import { ApiError, Client } from "./api";
import { renderChart } from "./chart";
import {
  applyResource,
  chartRows,
  emptyState,
  exportReport,
  mergePage,
  recordLabel,
  SessionState,
} from "./state";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function initApp(client: Client = new Client()): void {
  const state: SessionState = emptyState();

  const form = el<HTMLFormElement>("session-form");
  const catalogInput = el<HTMLInputElement>("catalog");
  const thetaMin = el<HTMLInputElement>("theta-min");
  const thetaMax = el<HTMLInputElement>("theta-max");
  const numBins = el<HTMLInputElement>("num-bins");
  const seedInput = el<HTMLInputElement>("seed");
  const statusLine = el<HTMLElement>("status");
  const pendingPanel = el<HTMLElement>("pending");
  const counter = el<HTMLElement>("labels-used");
  const chartHost = el<HTMLElement>("chart");
  const targetBtn = el<HTMLButtonElement>("label-target");
  const backgroundBtn = el<HTMLButtonElement>("label-background");
  const stopBtn = el<HTMLButtonElement>("stop");
  const exportLink = el<HTMLAnchorElement>("export");

  function setStatus(text: string, isError = false): void {
    statusLine.textContent = text;
    statusLine.className = isError ? "error" : "";
  }

  function render(): void {
    const doc = state.resource;
    if (!doc) return;
    counter.textContent = `${doc.labels_used} labels used`;
    chartHost.innerHTML = renderChart(doc.bins);
    const frozen = state.stopped || doc.status === "complete";
    targetBtn.disabled = frozen || doc.pending === null;
    backgroundBtn.disabled = frozen || doc.pending === null;
    stopBtn.disabled = frozen;
    if (doc.pending && !frozen) {
      pendingPanel.innerHTML =
        `<strong>source ${doc.pending.id}</strong> at ` +
        `(${doc.pending.x.toFixed(4)}, ${doc.pending.y.toFixed(4)}), ` +
        `classifier probability ${doc.pending.prob.toFixed(3)}`;
    } else {
      pendingPanel.textContent = frozen
        ? "session frozen"
        : "no pending source";
    }
    if (frozen) {
      const blob = new Blob([JSON.stringify(exportReport(state), null, 2)], {
        type: "application/json",
      });
      exportLink.href = URL.createObjectURL(blob);
      exportLink.download = `session-${doc.id}.json`;
      exportLink.hidden = false;
    }
  }

  async function refreshHistory(): Promise<void> {
    if (!state.resource) return;
    const page = await client.getEstimates(state.resource.id, state.next);
    mergePage(state, page);
  }

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      const doc = await client.createSession(
        catalogInput.value,
        {
          theta_min: Number(thetaMin.value),
          theta_max: Number(thetaMax.value),
          num_bins: Number(numBins.value),
        },
        Number(seedInput.value),
      );
      applyResource(state, doc);
      await refreshHistory();
      setStatus(`session ${doc.id} on catalog ${doc.catalog}`);
      render();
    } catch (err) {
      setStatus(
        err instanceof ApiError ? `${err.status}: ${err.message}` : String(err),
        true,
      );
    }
  });

  async function submit(label: 0 | 1): Promise<void> {
    const doc = state.resource;
    if (!doc || !doc.pending) return;
    const vertex = doc.pending.id;
    try {
      recordLabel(state, vertex);
      const updated = await client.submitLabel(doc.id, vertex, label);
      applyResource(state, updated);
      await refreshHistory();
      setStatus(
        updated.status === "complete"
          ? "all sources labeled"
          : `labeled source ${vertex} as ${label === 1 ? "target" : "background"}`,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // someone else advanced the session; resync instead of failing
        applyResource(state, await client.getSession(doc.id));
        await refreshHistory();
        setStatus(`conflict: ${err.message}; refreshed`, true);
      } else {
        setStatus(String(err), true);
      }
    }
    render();
  }

  targetBtn.addEventListener("click", () => void submit(1));
  backgroundBtn.addEventListener("click", () => void submit(0));

  stopBtn.addEventListener("click", async () => {
    const doc = state.resource;
    if (!doc) return;
    const updated = await client.stopSession(doc.id);
    state.stopped = true;
    applyResource(state, updated);
    setStatus("session stopped; report frozen");
    render();
  });

  // expose chart history for debugging in the console
  (window as unknown as { tpcfChartRows?: typeof chartRows }).tpcfChartRows =
    (s, b) => chartRows(s, b);
}

if (typeof document !== "undefined" && document.getElementById("session-form")) {
  initApp();
}
