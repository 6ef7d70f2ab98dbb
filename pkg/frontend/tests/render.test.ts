import { describe, expect, it } from "vitest";

import { HEAT_STOPS, rgbCss, valueToColor } from "../src/colormap.js";
import { makeGrid, NODATA } from "../src/grid.js";
import { legendText, renderGrid } from "../src/render.js";

/** Minimal canvas stub recording fill operations; no DOM needed. */
function stubCanvas(width: number, height: number) {
  const fills: Array<{ style: string; x: number; y: number }> = [];
  const ctx = {
    fillStyle: "",
    fillRect(x: number, y: number) {
      fills.push({ style: String(this.fillStyle), x, y });
    },
  };
  return {
    canvas: { width, height, getContext: () => ctx } as unknown as HTMLCanvasElement,
    fills,
  };
}

describe("canvas rendering", () => {
  it("paints every cell with the pure value color", () => {
    const grid = makeGrid(2, 2);
    grid.values = [0, 5, 10, NODATA];
    const { canvas, fills } = stubCanvas(20, 20);
    const legend = renderGrid(canvas, grid, { stops: HEAT_STOPS });
    expect(fills).toHaveLength(4);
    expect(fills[0].style).toBe(rgbCss(valueToColor(0, 0, 10, HEAT_STOPS)));
    expect(fills[1].style).toBe(rgbCss(valueToColor(5, 0, 10, HEAT_STOPS)));
    expect(fills[2].style).toBe(rgbCss(valueToColor(10, 0, 10, HEAT_STOPS)));
    expect(fills[3].style).toBe("#808080"); // nodata
    expect(legend).toEqual({ min: 0, max: 10 });
  });

  it("legend text formats the range with units", () => {
    expect(legendText({ min: 13.456, max: 17.1 }, "degC")).toBe("13.46 .. 17.10 degC");
  });
});
