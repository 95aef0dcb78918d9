/**
 * Paired-bar comparison of the number-basis populations of two optimal
 * probes (full-matrix vs photon-statistics method), one panel per mean
 * photon number.
 */

import type { EChartsOption } from "echarts";
import { basename } from "path";
import { parseScriptArgs, runScript } from "./cliArgs";
import { readStateJson, StateDocument, populations } from "./data";
import { writeFigure } from "./render";

export interface StatePair {
  label: string;
  first: StateDocument;
  second: StateDocument;
  firstName?: string;
  secondName?: string;
}

export function stateBarsOption(pairs: StatePair[]): EChartsOption {
  if (pairs.length === 0) throw new Error("no state pairs to plot");
  for (const pair of pairs) {
    if (pair.first.dim !== pair.second.dim) {
      throw new Error(`${pair.label}: state dimensions differ`);
    }
  }
  const columns = pairs.length;
  const grids = pairs.map((_, i) => ({
    left: `${6 + (i * 92) / columns}%`,
    width: `${80 / columns}%`,
    top: 56,
    bottom: 56,
  }));
  const series: NonNullable<EChartsOption["series"]> = [];
  pairs.forEach((pair, i) => {
    series.push(
      {
        name: pair.firstName ?? "full matrix",
        type: "bar",
        xAxisIndex: i,
        yAxisIndex: i,
        itemStyle: { color: "#7f7f7f" },
        barGap: "0%",
        data: populations(pair.first),
      },
      {
        name: pair.secondName ?? "photon statistics",
        type: "bar",
        xAxisIndex: i,
        yAxisIndex: i,
        itemStyle: { color: "#e6a817" },
        data: populations(pair.second),
      },
    );
  });
  return {
    legend: { top: 4, left: "center" },
    title: pairs.map((pair, i) => ({
      text: pair.label,
      left: `${6 + (i * 92) / columns + 40 / columns}%`,
      top: 28,
      textAlign: "center",
      textStyle: { fontSize: 11, fontWeight: "normal" },
    })),
    grid: grids,
    xAxis: pairs.map((pair, i) => ({
      gridIndex: i,
      type: "category" as const,
      data: Array.from({ length: pair.first.dim }, (_, n) => String(n)),
      name: i === 0 ? "photon number" : undefined,
      nameLocation: "middle" as const,
      nameGap: 26,
    })),
    yAxis: pairs.map((_, i) => ({
      gridIndex: i,
      type: "value" as const,
      max: 1,
      name: i === 0 ? "population" : undefined,
    })),
    series,
  };
}

if (require.main === module) {
  runScript(() => {
    const args = parseScriptArgs(process.argv.slice(2));
    if (args.inputs.length % 2 !== 0) throw new Error("state inputs come in pairs");
    const pairs: StatePair[] = [];
    for (let i = 0; i < args.inputs.length; i += 2) {
      pairs.push({
        label: basename(args.inputs[i], ".json"),
        first: readStateJson(args.inputs[i]),
        second: readStateJson(args.inputs[i + 1]),
      });
    }
    writeFigure(args.out, stateBarsOption(pairs), { png: args.png, width: 1200, height: 420 });
    console.log("wrote " + args.out);
  });
}
