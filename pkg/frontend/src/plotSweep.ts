/**
 * Athermal sweep figure: error probabilities of the optimal and coherent
 * probes (left), advantage in dB against fidelity to coherent (right,
 * dual axis), on a log reflectivity axis.
 */

import type { EChartsOption } from "echarts";
import { parseScriptArgs, runScript } from "./cliArgs";
import { readSweepCsv, SweepRow } from "./data";
import { writeFigure } from "./render";

export function sweepFigureOption(rows: SweepRow[], title = "Optimal-probe sweep"): EChartsOption {
  const rs = rows.map((row) => row.r);
  return {
    title: [
      { text: "Error probability", left: "12%", top: 6, textStyle: { fontSize: 13 } },
      { text: "Advantage and fidelity", left: "62%", top: 6, textStyle: { fontSize: 13 } },
      { text: title, left: "center", bottom: 4, textStyle: { fontSize: 12, fontWeight: "normal" } },
    ],
    legend: { top: 28, left: "center" },
    grid: [
      { left: "7%", right: "56%", top: 70, bottom: 60 },
      { left: "56%", right: "7%", top: 70, bottom: 60 },
    ],
    xAxis: [
      { gridIndex: 0, type: "log", name: "reflectivity r", nameLocation: "middle", nameGap: 28, min: Math.min(...rs), max: 1 },
      { gridIndex: 1, type: "log", name: "reflectivity r", nameLocation: "middle", nameGap: 28, min: Math.min(...rs), max: 1 },
    ],
    yAxis: [
      { gridIndex: 0, type: "value", name: "P_err" },
      { gridIndex: 1, type: "value", name: "advantage (dB)", position: "left" },
      { gridIndex: 1, type: "value", name: "fidelity to coherent", position: "right", min: 0, max: 1.05 },
    ],
    series: [
      {
        name: "coherent probe",
        type: "line",
        xAxisIndex: 0,
        yAxisIndex: 0,
        showSymbol: false,
        lineStyle: { color: "#333333" },
        itemStyle: { color: "#333333" },
        data: rows.map((row) => [row.r, row.p_err_coh]),
      },
      {
        name: "optimal probe",
        type: "line",
        xAxisIndex: 0,
        yAxisIndex: 0,
        showSymbol: false,
        lineStyle: { color: "#e6a817" },
        itemStyle: { color: "#e6a817" },
        data: rows.map((row) => [row.r, row.p_err_opt]),
      },
      {
        name: "advantage (dB)",
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 1,
        showSymbol: false,
        lineStyle: { color: "#e6a817" },
        itemStyle: { color: "#e6a817" },
        data: rows.map((row) => [row.r, row.qa_db]),
      },
      {
        name: "fidelity to coherent",
        type: "line",
        xAxisIndex: 1,
        yAxisIndex: 2,
        showSymbol: false,
        lineStyle: { color: "#333333" },
        itemStyle: { color: "#333333" },
        data: rows.map((row) => [row.r, row.fidelity_to_coherent]),
      },
    ],
  };
}

if (require.main === module) {
  runScript(() => {
    const args = parseScriptArgs(process.argv.slice(2));
    writeFigure(args.out, sweepFigureOption(readSweepCsv(args.inputs[0])), { png: args.png });
    console.log("wrote " + args.out);
  });
}
