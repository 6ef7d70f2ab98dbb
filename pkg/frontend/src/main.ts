// DOM wiring for the planner: volume editor canvas on the left, predicted
// temperature and diff-vs-baseline on the right.

import { createClient } from "./api.js";
import { DIVERGING_STOPS, HEAT_STOPS } from "./colormap.js";
import { makeGrid } from "./grid.js";
import { canvasToCell, legendText, renderGrid } from "./render.js";
import { ScenarioState, Tool } from "./state.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8000";

const api = createClient(SERVICE_URL);
let state = new ScenarioState(api, makeGrid(10, 8));

const volumeCanvas = document.getElementById("volume") as HTMLCanvasElement;
const tempCanvas = document.getElementById("temperature") as HTMLCanvasElement;
const diffCanvas = document.getElementById("diff") as HTMLCanvasElement;
const banner = document.getElementById("banner") as HTMLDivElement;
const notice = document.getElementById("notice") as HTMLDivElement;
const volumeLegend = document.getElementById("volume-legend") as HTMLSpanElement;
const tempLegend = document.getElementById("temp-legend") as HTMLSpanElement;
const diffLegend = document.getElementById("diff-legend") as HTMLSpanElement;
const modelLabel = document.getElementById("model-label") as HTMLSpanElement;
const toolSelect = document.getElementById("tool") as HTMLSelectElement;
const amountInput = document.getElementById("amount") as HTMLInputElement;
const brushInput = document.getElementById("brush") as HTMLInputElement;
const scenarioName = document.getElementById("scenario-name") as HTMLInputElement;
const scenarioId = document.getElementById("scenario-id") as HTMLInputElement;

function showError(message: string | null) {
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function redraw() {
  const legend = renderGrid(volumeCanvas, state.working, { stops: HEAT_STOPS });
  volumeLegend.textContent = legendText(legend, "m³");
  if (state.lastPrediction) {
    const tl = renderGrid(tempCanvas, state.lastPrediction.grid, {
      stops: HEAT_STOPS,
      min: state.lastPrediction.tMin,
      max: state.lastPrediction.tMax,
    });
    tempLegend.textContent = legendText(tl, "°C");
    modelLabel.textContent = `model ${state.lastPrediction.modelId}`;
  }
  const diff = state.diffLayer();
  if (diff) {
    const dl = renderGrid(diffCanvas, diff, { stops: DIVERGING_STOPS, centerZero: true });
    diffLegend.textContent = legendText(dl, "°C vs baseline");
  }
  notice.textContent = state.lastNotice ?? "";
  showError(state.lastError);
}

let painting = false;

function paintAt(ev: MouseEvent) {
  const rect = volumeCanvas.getBoundingClientRect();
  const cell = canvasToCell(volumeCanvas, state.working, ev.clientX - rect.left, ev.clientY - rect.top);
  if (!cell) return;
  state.brushSize = parseInt(brushInput.value, 10) || 1;
  state.editCells(
    state.brushCells(cell.col, cell.row),
    toolSelect.value as Tool,
    parseFloat(amountInput.value) || 0,
  );
  redraw();
}

volumeCanvas.addEventListener("mousedown", (ev) => {
  painting = true;
  paintAt(ev);
});
volumeCanvas.addEventListener("mousemove", (ev) => {
  if (painting) paintAt(ev);
});
window.addEventListener("mouseup", () => {
  painting = false;
});

document.getElementById("predict")!.addEventListener("click", async () => {
  try {
    await state.ensureBaseline();
  } catch (err) {
    showError(`baseline prediction failed: ${err instanceof Error ? err.message : err}`);
    return;
  }
  await state.runPrediction();
  redraw();
});

document.getElementById("undo")!.addEventListener("click", () => {
  state.undo();
  redraw();
});

document.getElementById("reset")!.addEventListener("click", () => {
  state.resetAll();
  redraw();
});

document.getElementById("save")!.addEventListener("click", async () => {
  try {
    state.scenarioName = scenarioName.value || "untitled";
    const id = await state.save();
    scenarioId.value = id;
    notice.textContent = `saved scenario ${id}`;
  } catch (err) {
    showError(`save failed: ${err instanceof Error ? err.message : err}`);
  }
});

document.getElementById("load")!.addEventListener("click", async () => {
  const id = scenarioId.value.trim();
  if (!id) {
    showError("enter a scenario id to load");
    return;
  }
  if (state.dirty && !window.confirm("Discard current edits and load the scenario?")) {
    return;
  }
  try {
    await state.load(id);
    scenarioName.value = state.scenarioName;
    showError(null);
    redraw();
  } catch (err) {
    showError(`load failed: ${err instanceof Error ? err.message : err}`);
  }
});

api
  .modelInfo()
  .then((info) => {
    modelLabel.textContent = `model ${info.id} (${info.type}, ${info.n_trees} trees)`;
  })
  .catch(() => {
    showError(`service unreachable at ${SERVICE_URL} (append ?service=http://host:port)`);
  });

redraw();
