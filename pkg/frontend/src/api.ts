// Typed client for the what-if prediction service (the only backend surface
// this app talks to).

import type { Grid } from "./grid.js";

export interface PredictResponse {
  model_id: string;
  sigma: number;
  radius: number;
  prediction: Grid;
  t_min: number;
  t_max: number;
}

export interface ScenarioOut {
  id: string;
  name: string;
  created_at: string;
  model_id: string | null;
  base: Grid;
  edited: Grid;
}

export interface ScenarioSummary {
  id: string;
  name: string;
  created_at: string;
  ncols: number;
  nrows: number;
}

export interface ModelInfo {
  id: string;
  type: string;
  params: Record<string, unknown>;
  training_cities: string[];
  feature_arity: number;
  n_trees: number;
}

export interface ServiceApi {
  predict(grid: Grid, sigma?: number, radius?: number): Promise<PredictResponse>;
  saveScenario(name: string, base: Grid, edited: Grid, id?: string): Promise<ScenarioOut>;
  loadScenario(id: string): Promise<ScenarioOut>;
  listScenarios(): Promise<ScenarioSummary[]>;
  deleteScenario(id: string): Promise<void>;
  modelInfo(): Promise<ModelInfo>;
}

export class HttpError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      // keep statusText
    }
    throw new HttpError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export function createClient(baseUrl: string, fetchFn: typeof fetch = fetch): ServiceApi {
  const post = (path: string, body: unknown) =>
    fetchFn(baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  return {
    async predict(grid, sigma, radius) {
      return asJson(await post("/predict", { grid, sigma, radius }));
    },
    async saveScenario(name, base, edited, id) {
      return asJson(await post("/scenarios", { id, name, base, edited }));
    },
    async loadScenario(id) {
      return asJson(await fetchFn(`${baseUrl}/scenarios/${id}`));
    },
    async listScenarios() {
      return asJson(await fetchFn(`${baseUrl}/scenarios`));
    },
    async deleteScenario(id) {
      const resp = await fetchFn(`${baseUrl}/scenarios/${id}`, { method: "DELETE" });
      if (!resp.ok) throw new HttpError(resp.status, resp.statusText);
    },
    async modelInfo() {
      return asJson(await fetchFn(`${baseUrl}/model`));
    },
  };
}
