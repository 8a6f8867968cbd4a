/** Browser bootstrap: wires the static page's controls to the session. */

import { ApiClient } from "./api.js";
import {
  Algorithm,
  DfMode,
  NumericField,
  PRESET_NAMES,
  canRun,
} from "./config.js";
import { renderFunnel } from "./funnel.js";
import { renderNet } from "./netview.js";
import { UiSession } from "./session.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export function mount(baseUrl: string): UiSession {
  const session = new UiSession(new ApiClient(baseUrl));

  const fileInput = byId<HTMLInputElement>("log-file");
  const logStats = byId<HTMLElement>("log-stats");
  const presetSelect = byId<HTMLSelectElement>("preset");
  const algorithmSelect = byId<HTMLSelectElement>("algorithm");
  const runButton = byId<HTMLButtonElement>("run");
  const funnelPanel = byId<HTMLElement>("funnel-panel");
  const netPanel = byId<HTMLElement>("net-panel");
  const historyList = byId<HTMLElement>("history");
  const downloadLink = byId<HTMLAnchorElement>("download-pnml");
  const dModeSelect = byId<HTMLSelectElement>("d-mode");

  const numericInputs: Array<[NumericField, HTMLInputElement]> = (
    [
      ["dValue", "d-value"],
      ["n", "n"],
      ["b", "b"],
      ["t", "t"],
      ["r", "r"],
      ["problemThreshold", "problem-threshold"],
    ] as Array<[NumericField, string]>
  ).map(([field, id]) => [field, byId<HTMLInputElement>(id)]);

  for (const name of PRESET_NAMES) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    presetSelect.append(option);
  }
  const custom = document.createElement("option");
  custom.value = "custom";
  custom.textContent = "custom";
  presetSelect.append(custom);

  function syncPanel(): void {
    const { config, preset, messages } = session.panel;
    presetSelect.value = preset;
    algorithmSelect.value = session.panel.algorithm;
    dModeSelect.value = config.d.mode;
    const values: Record<NumericField, number> = {
      dValue: config.d.value,
      n: config.n,
      b: config.b,
      t: config.t,
      r: config.r,
      problemThreshold: config.problem_threshold,
    };
    for (const [field, input] of numericInputs) {
      if (document.activeElement !== input) {
        input.value = String(values[field]);
      }
      const message = messages[field];
      input.classList.toggle("invalid", Boolean(message));
      input.title = message ?? "";
    }
    runButton.disabled = !canRun(session.panel) || !session.log;
  }

  function syncResults(): void {
    funnelPanel.innerHTML = renderFunnel(
      session.lastReport,
      session.disconnected,
      session.isStale(),
    );
    netPanel.innerHTML = session.lastNetId
      ? renderNet(session.lastNet, session.lastDot)
      : '<div class="placeholder">run discovery to see the net</div>';
    const url = session.pnmlUrl();
    downloadLink.style.display = url ? "inline" : "none";
    if (url) downloadLink.href = url;
    historyList.innerHTML = session.history
      .map(
        (entry, i) =>
          `<li>#${i + 1} ${entry.algorithm} ${entry.preset}: ${entry.places} places</li>`,
      )
      .join("");
    const removeButton = funnelPanel.querySelector<HTMLButtonElement>(
      'button[data-action="remove-greedy"]',
    );
    removeButton?.addEventListener("click", () => {
      const k = Number(removeButton.dataset.k ?? "0");
      session
        .removeDisconnected(k)
        .then(syncResults)
        .catch((error: Error) => alert(error.message));
    });
  }

  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    try {
      const result = await session.upload(file.name, file);
      const s = result.stats;
      logStats.textContent =
        `${s.events} events, ${s.traces} traces, ` +
        `${s.variants} variants, ${s.activities} activities`;
    } catch (error) {
      logStats.textContent = (error as Error).message;
    }
    syncPanel();
    syncResults();
  });

  presetSelect.addEventListener("change", () => {
    if (presetSelect.value !== "custom") {
      session.choosePreset(presetSelect.value);
    }
    syncPanel();
    funnelPanel.innerHTML = renderFunnel(
      session.lastReport,
      session.disconnected,
      session.isStale(),
    );
  });

  algorithmSelect.addEventListener("change", () => {
    session.chooseAlgorithm(algorithmSelect.value as Algorithm);
    syncPanel();
  });

  dModeSelect.addEventListener("change", () => {
    session.editDfMode(dModeSelect.value as DfMode);
    syncPanel();
  });

  for (const [field, input] of numericInputs) {
    input.addEventListener("change", () => {
      session.editField(field, Number(input.value));
      syncPanel();
      funnelPanel.innerHTML = renderFunnel(
        session.lastReport,
        session.disconnected,
        session.isStale(),
      );
    });
  }

  runButton.addEventListener("click", () => {
    runButton.disabled = true;
    session
      .run()
      .then(() => {
        syncPanel();
        syncResults();
      })
      .catch((error: Error) => {
        alert(error.message);
        syncPanel();
      });
  });

  syncPanel();
  syncResults();
  return session;
}

declare global {
  interface Window {
    alphapppSession?: UiSession;
  }
}

if (typeof document !== "undefined" && document.getElementById("run")) {
  const base = new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8000";
  window.alphapppSession = mount(base);
}
