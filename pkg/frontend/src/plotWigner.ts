/**
 * Wigner heatmap with a diverging color scale centered at zero, so
 * negative quasiprobability regions stand out.
 */

import type { EChartsOption } from "echarts";
import { parseScriptArgs, runScript } from "./cliArgs";
import { divergingStops, symmetricRange } from "./colormap";
import { readWignerCsv, WignerTable } from "./data";
import { writeFigure } from "./render";

export function wignerFigureOption(table: WignerTable, title = "Wigner function"): EChartsOption {
  const [lo, hi] = symmetricRange(table.values);
  const cells: [number, number, number][] = [];
  table.x.forEach((_, i) => {
    table.p.forEach((_, j) => {
      cells.push([i, j, table.values[i][j]]);
    });
  });
  return {
    title: { text: title, left: "center", top: 6, textStyle: { fontSize: 13 } },
    grid: { left: "10%", right: "16%", top: 44, bottom: 60 },
    xAxis: {
      type: "category",
      data: table.x.map((v) => v.toFixed(2)),
      name: "x",
      nameLocation: "middle",
      nameGap: 28,
      axisLabel: { interval: Math.max(0, Math.floor(table.x.length / 8) - 1) },
    },
    yAxis: {
      type: "category",
      data: table.p.map((v) => v.toFixed(2)),
      name: "p",
      axisLabel: { interval: Math.max(0, Math.floor(table.p.length / 8) - 1) },
    },
    visualMap: {
      min: lo,
      max: hi,
      calculable: false,
      orient: "vertical",
      right: 8,
      top: "center",
      inRange: { color: divergingStops() },
    },
    series: [
      {
        type: "heatmap",
        data: cells,
        progressive: 0,
        emphasis: { disabled: true },
      },
    ],
  };
}

if (require.main === module) {
  runScript(() => {
    const args = parseScriptArgs(process.argv.slice(2));
    writeFigure(args.out, wignerFigureOption(readWignerCsv(args.inputs[0])), {
      png: args.png,
      width: 640,
      height: 560,
    });
    console.log("wrote " + args.out);
  });
}
