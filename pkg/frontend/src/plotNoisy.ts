/**
 * Noisy-regime figure: per-noise-level advantage curves (top), photon and
 * phase spread ratios against the coherent probe (middle), and the
 * coherence ratio (bottom).  The spread-ratio panel is where the
 * phase-squeezed-to-number-squeezed transition shows up as a crossing
 * of 1.
 */

import type { EChartsOption } from "echarts";
import { basename } from "path";
import { parseScriptArgs, runScript } from "./cliArgs";
import { readSweepCsv, SweepRow } from "./data";
import { writeFigure } from "./render";

const PALETTE = ["#e6a817", "#7f7f7f", "#1a1a1a", "#4472c4", "#c0504d"];

export interface NoisyInput {
  label: string;
  rows: SweepRow[];
}

export function noisyFigureOption(tables: NoisyInput[]): EChartsOption {
  const series: NonNullable<EChartsOption["series"]> = [];
  tables.forEach((table, i) => {
    const color = PALETTE[i % PALETTE.length];
    series.push(
      {
        name: `QA, ${table.label}`,
        type: "line",
        xAxisIndex: 0,
        yAxisIndex: 0,
        showSymbol: false,
        lineStyle: { color },
        itemStyle: { color },
        data: table.rows.map((row) => [row.r, row.qa_db]),
      },
      {
        name: `n spread, ${table.label}`,
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: true,
        symbol: "rect",
        symbolSize: 5,
        lineStyle: { color },
        itemStyle: { color },
        data: table.rows.map((row) => [row.r, row.sd_ratio_n]),
      },
      {
        name: `phase spread, ${table.label}`,
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: true,
        symbol: "circle",
        symbolSize: 5,
        lineStyle: { color, type: "dashed" },
        itemStyle: { color },
        data: table.rows.map((row) => [row.r, row.sd_ratio_phi]),
      },
      {
        name: `coherence, ${table.label}`,
        type: "line",
        xAxisIndex: 2,
        yAxisIndex: 2,
        showSymbol: false,
        lineStyle: { color },
        itemStyle: { color },
        data: table.rows.map((row) => [row.r, row.coherence_ratio]),
      },
    );
  });
  const xAxisBase = { type: "value" as const, min: 0, max: 1 };
  return {
    legend: { top: 4, left: "center", textStyle: { fontSize: 10 } },
    grid: [
      { left: "10%", right: "6%", top: 60, height: "20%" },
      { left: "10%", right: "6%", top: "42%", height: "20%" },
      { left: "10%", right: "6%", top: "72%", height: "20%" },
    ],
    xAxis: [
      { ...xAxisBase, gridIndex: 0 },
      { ...xAxisBase, gridIndex: 1 },
      { ...xAxisBase, gridIndex: 2, name: "reflectivity r", nameLocation: "middle", nameGap: 26 },
    ],
    yAxis: [
      { gridIndex: 0, type: "value", name: "advantage (dB)" },
      { gridIndex: 1, type: "value", name: "spread ratio" },
      { gridIndex: 2, type: "value", name: "coherence ratio" },
    ],
    series,
  };
}

if (require.main === module) {
  runScript(() => {
    const args = parseScriptArgs(process.argv.slice(2));
    const tables = args.inputs.map((path) => ({ label: basename(path, ".csv"), rows: readSweepCsv(path) }));
    writeFigure(args.out, noisyFigureOption(tables), { png: args.png, width: 760, height: 860 });
    console.log("wrote " + args.out);
  });
}
