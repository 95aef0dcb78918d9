/**
 * Phase-density overlays: the optimized probe's distribution against its
 * coherent reference, one curve pair per input table.
 */

import type { EChartsOption } from "echarts";
import { basename } from "path";
import { parseScriptArgs, runScript } from "./cliArgs";
import { PhaseTable, readPhaseCsv } from "./data";
import { writeFigure } from "./render";

const PALETTE = ["#e6a817", "#4472c4", "#c0504d", "#7f7f7f"];

export interface PhaseInput {
  label: string;
  table: PhaseTable;
}

export function phaseFigureOption(inputs: PhaseInput[]): EChartsOption {
  if (inputs.length === 0) throw new Error("no phase tables to plot");
  const series: NonNullable<EChartsOption["series"]> = [];
  inputs.forEach((input, i) => {
    const color = PALETTE[i % PALETTE.length];
    series.push({
      name: `optimal, ${input.label}`,
      type: "line",
      showSymbol: false,
      lineStyle: { color },
      itemStyle: { color },
      data: input.table.phi.map((phi, k) => [phi, input.table.prob[k]]),
    });
    if (input.table.probCoherent) {
      series.push({
        name: `coherent, ${input.label}`,
        type: "line",
        showSymbol: false,
        lineStyle: { color, type: "dashed", width: 1 },
        itemStyle: { color },
        data: input.table.phi.map((phi, k) => [phi, input.table.probCoherent![k]]),
      });
    }
  });
  return {
    legend: { top: 6, left: "center", textStyle: { fontSize: 10 } },
    grid: { left: "9%", right: "5%", top: 54, bottom: 56 },
    xAxis: {
      type: "value",
      name: "phase (rad)",
      nameLocation: "middle",
      nameGap: 28,
      min: -Math.PI,
      max: Math.PI,
    },
    yAxis: { type: "value", name: "P(phase)" },
    series,
  };
}

if (require.main === module) {
  runScript(() => {
    const args = parseScriptArgs(process.argv.slice(2));
    const inputs = args.inputs.map((path) => ({ label: basename(path, ".csv"), table: readPhaseCsv(path) }));
    writeFigure(args.out, phaseFigureOption(inputs), { png: args.png });
    console.log("wrote " + args.out);
  });
}
