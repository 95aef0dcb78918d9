/**
 * Regenerate every figure family from a preset-output directory.
 *
 * Expected layout (as produced by running the shipped presets):
 *   <data>/fig2/sweep_*.csv                      -> fig2_sweep.svg/.png
 *   <data>/fig3/ops_{dm,ps}_*_state.json pairs   -> fig3_state_bars.svg/.png
 *   <data>/fig4/*_phase.csv                      -> fig4_phase.svg/.png
 *   <data>/fig5/sweep_*.csv                      -> fig5_noisy.svg/.png
 *   <data>/** /*_wigner.csv                      -> wigner_<stem>.svg/.png
 */

import { existsSync, readdirSync } from "fs";
import { basename, join } from "path";
import { parseArgs } from "node:util";
import { readPhaseCsv, readStateJson, readSweepCsv, readWignerCsv } from "./data";
import { writeFigure } from "./render";
import { sweepFigureOption } from "./plotSweep";
import { noisyFigureOption } from "./plotNoisy";
import { stateBarsOption, StatePair } from "./plotStateBars";
import { phaseFigureOption } from "./plotPhase";
import { wignerFigureOption } from "./plotWigner";

/** Decode a filename tag back into its numeric text, e.g. "1p25" -> "1.25". */
export function untag(tag: string): string {
  return tag.replace(/p/g, ".").replace(/m/g, "-");
}

function listFiles(dir: string, suffix: string): string[] {
  if (!existsSync(dir)) return [];
  return readdirSync(dir)
    .filter((name) => name.endsWith(suffix))
    .sort()
    .map((name) => join(dir, name));
}

function makeSweepFigure(dataDir: string, outDir: string, png: boolean): string | null {
  const tables = listFiles(join(dataDir, "fig2"), ".csv").filter((p) => basename(p).startsWith("sweep_"));
  if (tables.length === 0) return null;
  const rows = readSweepCsv(tables[0]);
  const label = `mean photon ${rows[0]?.n_bar ?? "?"}, noise ${rows[0]?.n_env ?? "?"}`;
  const path = join(outDir, "fig2_sweep.svg");
  writeFigure(path, sweepFigureOption(rows, label), { png });
  return path;
}

function makeStateBarsFigure(dataDir: string, outDir: string, png: boolean): string | null {
  const dir = join(dataDir, "fig3");
  const dmStates = listFiles(dir, "_state.json").filter((p) => basename(p).startsWith("ops_dm_"));
  const pairs: StatePair[] = [];
  for (const dmPath of dmStates) {
    const psPath = join(dir, basename(dmPath).replace("ops_dm_", "ops_ps_"));
    if (!existsSync(psPath)) continue;
    const match = basename(dmPath).match(/nbar([0-9pm]+)_state\.json$/);
    pairs.push({
      label: match ? `mean photon ${untag(match[1])}` : basename(dmPath),
      first: readStateJson(dmPath),
      second: readStateJson(psPath),
    });
  }
  if (pairs.length === 0) return null;
  const path = join(outDir, "fig3_state_bars.svg");
  writeFigure(path, stateBarsOption(pairs), { png, width: 1200, height: 420 });
  return path;
}

function makePhaseFigure(dataDir: string, outDir: string, png: boolean): string | null {
  const tables = listFiles(join(dataDir, "fig4"), "_phase.csv");
  if (tables.length === 0) return null;
  const inputs = tables.map((p) => {
    const match = basename(p).match(/nbar([0-9pm]+)_phase\.csv$/);
    return {
      label: match ? `mean photon ${untag(match[1])}` : basename(p),
      table: readPhaseCsv(p),
    };
  });
  const path = join(outDir, "fig4_phase.svg");
  writeFigure(path, phaseFigureOption(inputs), { png });
  return path;
}

function makeNoisyFigure(dataDir: string, outDir: string, png: boolean): string | null {
  const tables = listFiles(join(dataDir, "fig5"), ".csv").filter((p) => basename(p).startsWith("sweep_"));
  if (tables.length === 0) return null;
  const inputs = tables.map((p) => {
    const match = basename(p).match(/nenv([0-9pm]+)_/);
    return {
      label: match ? `noise ${untag(match[1])}` : basename(p),
      rows: readSweepCsv(p),
    };
  });
  const path = join(outDir, "fig5_noisy.svg");
  writeFigure(path, noisyFigureOption(inputs), { png, width: 760, height: 860 });
  return path;
}

function makeWignerFigures(dataDir: string, outDir: string, png: boolean): string[] {
  const written: string[] = [];
  const stack = [dataDir];
  while (stack.length > 0) {
    const dir = stack.pop()!;
    for (const entry of readdirSync(dir, { withFileTypes: true })) {
      const full = join(dir, entry.name);
      if (entry.isDirectory()) stack.push(full);
      else if (entry.name.endsWith("_wigner.csv")) {
        const table = readWignerCsv(full);
        const stem = basename(entry.name, "_wigner.csv");
        const path = join(outDir, `wigner_${stem}.svg`);
        writeFigure(path, wignerFigureOption(table, `Wigner function: ${stem}`), {
          png,
          width: 640,
          height: 560,
        });
        written.push(path);
      }
    }
  }
  return written;
}

export function regenerateAll(dataDir: string, outDir: string, png = true): string[] {
  if (!existsSync(dataDir)) throw new Error(`data directory not found: ${dataDir}`);
  const written: (string | null)[] = [
    makeSweepFigure(dataDir, outDir, png),
    makeStateBarsFigure(dataDir, outDir, png),
    makePhaseFigure(dataDir, outDir, png),
    makeNoisyFigure(dataDir, outDir, png),
    ...makeWignerFigures(dataDir, outDir, png),
  ];
  return written.filter((p): p is string => p !== null);
}

function main(): void {
  const { values } = parseArgs({
    options: {
      data: { type: "string" },
      out: { type: "string" },
      "no-png": { type: "boolean" },
    },
  });
  if (!values.data || !values.out) {
    console.error("usage: driver --data <preset-output-dir> --out <figure-dir> [--no-png]");
    process.exitCode = 2;
    return;
  }
  const written = regenerateAll(values.data, values.out, !values["no-png"]);
  if (written.length === 0) {
    console.error("no inputs found under " + values.data);
    process.exitCode = 1;
    return;
  }
  for (const path of written) console.log("wrote " + path);
}

if (require.main === module) {
  main();
}
