// Grid model mirroring the service wire format: row-major values, row 0 = north.

export interface Grid {
  ncols: number;
  nrows: number;
  cellsize_m: number;
  values: number[];
  nodata: number;
}

export const NODATA = -999;

export function makeGrid(ncols: number, nrows: number, cellsizeM = 1000, fill = 0): Grid {
  return {
    ncols,
    nrows,
    cellsize_m: cellsizeM,
    values: new Array(ncols * nrows).fill(fill),
    nodata: NODATA,
  };
}

export function cloneGrid(g: Grid): Grid {
  return { ...g, values: g.values.slice() };
}

export function gridsEqual(a: Grid, b: Grid): boolean {
  return (
    a.ncols === b.ncols &&
    a.nrows === b.nrows &&
    a.cellsize_m === b.cellsize_m &&
    a.values.length === b.values.length &&
    a.values.every((v, i) => v === b.values[i])
  );
}

export function cellIndex(g: Grid, col: number, row: number): number {
  return row * g.ncols + col;
}

export function inBounds(g: Grid, col: number, row: number): boolean {
  return col >= 0 && col < g.ncols && row >= 0 && row < g.nrows;
}

/** Per-cell a - b; either side nodata stays nodata. */
export function diffGrids(a: Grid, b: Grid): Grid {
  if (a.ncols !== b.ncols || a.nrows !== b.nrows) {
    throw new Error(`grid size mismatch: ${a.ncols}x${a.nrows} vs ${b.ncols}x${b.nrows}`);
  }
  const out = cloneGrid(a);
  out.values = a.values.map((v, i) =>
    v === a.nodata || b.values[i] === b.nodata ? a.nodata : v - b.values[i],
  );
  return out;
}

export function valueRange(g: Grid): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const v of g.values) {
    if (v === g.nodata) continue;
    if (v < min) min = v;
    if (v > max) max = v;
  }
  if (min > max) {
    return { min: 0, max: 1 };
  }
  return { min, max };
}
