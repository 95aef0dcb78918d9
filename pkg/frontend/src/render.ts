/**
 * Server-side chart rendering: echarts options in, SVG/PNG files out.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import * as echarts from "echarts";

export interface RenderOptions {
  width?: number;
  height?: number;
  /** also write a .png next to the .svg */
  png?: boolean;
}

export function renderToSvg(option: echarts.EChartsOption, width: number, height: number): string {
  // SSR mode takes no DOM node; the types want one, hence the cast
  const chart = echarts.init(null as never, undefined, {
    renderer: "svg",
    ssr: true,
    width,
    height,
  });
  chart.setOption({ animation: false, ...option });
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

/** Write chart.svg (and optionally chart.png) for the given option. */
export function writeFigure(
  svgPath: string,
  option: echarts.EChartsOption,
  opts: RenderOptions = {},
): void {
  const { width = 900, height = 520, png = true } = opts;
  const svg = renderToSvg(option, width, height);
  mkdirSync(dirname(svgPath), { recursive: true });
  writeFileSync(svgPath, svg, "utf-8");
  if (png) {
    // resvg is a prebuilt native binding; load lazily so SVG-only use
    // never depends on it
    const { Resvg } = require("@resvg/resvg-js");
    const rendered = new Resvg(svg, { fitTo: { mode: "width", value: width * 2 } }).render();
    writeFileSync(svgPath.replace(/\.svg$/, ".png"), rendered.asPng());
  }
}
