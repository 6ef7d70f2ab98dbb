// Scenario editing state: working grid, tools, undo stack, prediction layers.
//
// Prediction responses are matched against a request sequence number; a
// response older than the latest issued request is discarded, so a slow
// reply can never overwrite the result of a newer edit.

import type { Grid } from "./grid.js";
import { cloneGrid, diffGrids, gridsEqual, inBounds, cellIndex } from "./grid.js";
import type { PredictResponse, ServiceApi } from "./api.js";

export type Tool = "set" | "add" | "subtract" | "reset";

export interface Cell {
  col: number;
  row: number;
}

export interface PredictionLayer {
  grid: Grid;
  modelId: string;
  tMin: number;
  tMax: number;
}

export class ScenarioState {
  base: Grid;
  working: Grid;
  lastPrediction: PredictionLayer | null = null;
  baselinePrediction: PredictionLayer | null = null;
  tool: Tool = "add";
  brushSize = 1;
  scenarioId: string | null = null;
  scenarioName = "untitled";
  lastError: string | null = null;
  lastNotice: string | null = null;

  private undoStack: Grid[] = [];
  private requestSeq = 0;
  private appliedSeq = 0;

  constructor(
    private api: ServiceApi,
    base: Grid,
  ) {
    this.base = cloneGrid(base);
    this.working = cloneGrid(base);
  }

  /** Cells covered by the square brush centered on (col, row). */
  brushCells(col: number, row: number): Cell[] {
    const r = Math.max(0, this.brushSize - 1);
    const cells: Cell[] = [];
    for (let dr = -r; dr <= r; dr++) {
      for (let dc = -r; dc <= r; dc++) {
        cells.push({ col: col + dc, row: row + dr });
      }
    }
    return cells;
  }

  /**
   * Apply the current tool to the given cells. Volumes clamp to >= 0, the
   * base grid is never touched, and out-of-bounds cells are skipped with a
   * visible notice. Returns the number of cells actually edited.
   */
  editCells(cells: Cell[], tool: Tool = this.tool, amount = 0): number {
    const next = cloneGrid(this.working);
    let edited = 0;
    let ignored = 0;
    for (const { col, row } of cells) {
      if (!inBounds(next, col, row)) {
        ignored++;
        continue;
      }
      const i = cellIndex(next, col, row);
      let v = next.values[i];
      if (tool === "set") v = amount;
      else if (tool === "add") v = v + amount;
      else if (tool === "subtract") v = v - amount;
      else v = this.base.values[i];
      next.values[i] = Math.max(0, v);
      edited++;
    }
    this.lastNotice = ignored > 0 ? `${ignored} edit(s) outside the grid ignored` : null;
    if (edited > 0) {
      this.undoStack.push(this.working);
      this.working = next;
    }
    return edited;
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.working = prev;
    return true;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  resetAll(): void {
    this.undoStack.push(this.working);
    this.working = cloneGrid(this.base);
  }

  get dirty(): boolean {
    return !gridsEqual(this.working, this.base);
  }

  private toLayer(resp: PredictResponse): PredictionLayer {
    return {
      grid: resp.prediction,
      modelId: resp.model_id,
      tMin: resp.t_min,
      tMax: resp.t_max,
    };
  }

  /** Predict the untouched base grid once; the diff layer compares to this. */
  async ensureBaseline(): Promise<void> {
    if (this.baselinePrediction) return;
    const resp = await this.api.predict(this.base);
    this.baselinePrediction = this.toLayer(resp);
  }

  /**
   * Request a prediction for the working grid. Failures and stale responses
   * leave the state untouched; only the response to the newest request is
   * applied.
   */
  async runPrediction(sigma?: number, radius?: number): Promise<boolean> {
    const seq = ++this.requestSeq;
    try {
      const resp = await this.api.predict(this.working, sigma, radius);
      if (seq < this.requestSeq || seq <= this.appliedSeq) {
        return false; // superseded by a newer request
      }
      this.appliedSeq = seq;
      this.lastPrediction = this.toLayer(resp);
      this.lastError = null;
      return true;
    } catch (err) {
      if (seq === this.requestSeq) {
        this.lastError = err instanceof Error ? err.message : String(err);
      }
      return false;
    }
  }

  /** prediction - baseline, per cell; null until both layers exist. */
  diffLayer(): Grid | null {
    if (!this.lastPrediction || !this.baselinePrediction) return null;
    return diffGrids(this.lastPrediction.grid, this.baselinePrediction.grid);
  }

  async save(): Promise<string> {
    const out = await this.api.saveScenario(
      this.scenarioName,
      this.base,
      this.working,
      this.scenarioId ?? undefined,
    );
    this.scenarioId = out.id;
    return out.id;
  }

  /** Replace base + working from a stored scenario; edits are discarded. */
  async load(id: string): Promise<void> {
    const scenario = await this.api.loadScenario(id);
    this.base = cloneGrid(scenario.base);
    this.working = cloneGrid(scenario.edited);
    this.scenarioId = scenario.id;
    this.scenarioName = scenario.name;
    this.undoStack = [];
    this.lastPrediction = null;
    this.baselinePrediction = null;
    this.lastError = null;
  }
}
