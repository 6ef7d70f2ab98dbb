// Canvas rendering of coarse grids. Cell colors are a pure function of
// (value, layer min/max, colormap); everything DOM-flavored stays here.

import type { Grid } from "./grid.js";
import { valueRange } from "./grid.js";
import { NODATA_COLOR, rgbCss, valueToColor } from "./colormap.js";

export interface RenderOptions {
  stops: string[];
  centerZero?: boolean;
  /** fixed scale overrides; default is the grid's own range */
  min?: number;
  max?: number;
}

export interface Legend {
  min: number;
  max: number;
}

export function renderGrid(
  canvas: HTMLCanvasElement,
  grid: Grid,
  opts: RenderOptions,
): Legend {
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d canvas context unavailable");
  const range = valueRange(grid);
  const min = opts.min ?? range.min;
  const max = opts.max ?? range.max;
  const cw = canvas.width / grid.ncols;
  const ch = canvas.height / grid.nrows;
  for (let row = 0; row < grid.nrows; row++) {
    for (let col = 0; col < grid.ncols; col++) {
      const v = grid.values[row * grid.ncols + col];
      ctx.fillStyle =
        v === grid.nodata
          ? NODATA_COLOR
          : rgbCss(valueToColor(v, min, max, opts.stops, opts.centerZero));
      ctx.fillRect(col * cw, row * ch, Math.ceil(cw), Math.ceil(ch));
    }
  }
  return { min, max };
}

export function legendText(legend: Legend, unit: string): string {
  return `${legend.min.toFixed(2)} .. ${legend.max.toFixed(2)} ${unit}`;
}

/** Canvas pixel position -> cell coordinates, or null outside the canvas. */
export function canvasToCell(
  canvas: HTMLCanvasElement,
  grid: Grid,
  px: number,
  py: number,
): { col: number; row: number } | null {
  const col = Math.floor((px / canvas.clientWidth) * grid.ncols);
  const row = Math.floor((py / canvas.clientHeight) * grid.nrows);
  if (col < 0 || col >= grid.ncols || row < 0 || row >= grid.nrows) return null;
  return { col, row };
}
