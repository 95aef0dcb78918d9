/**
 * Readers for the simulator's documented artifact formats.
 *
 * These parsers never compute physics; they only deserialize the CSV/JSON
 * tables the CLI writes.  Column lookups go through the header by name, so
 * column order is free to change on the producer side.
 */

import { readFileSync } from "fs";

/** One row of a reflectivity sweep table. */
export interface SweepRow {
  r: number;
  n_env: number;
  n_bar: number;
  p_err_coh: number;
  p_err_opt: number;
  qa_db: number;
  fidelity_to_coherent: number;
  photon_variance: number;
  phase_fwhm: number;
  coherence_value: number;
  sd_ratio_n: number;
  sd_ratio_phi: number;
  coherence_ratio: number;
  iterations: number;
  converged: boolean;
}

export const SWEEP_COLUMNS: (keyof SweepRow)[] = [
  "r", "n_env", "n_bar", "p_err_coh", "p_err_opt", "qa_db",
  "fidelity_to_coherent", "photon_variance", "phase_fwhm", "coherence_value",
  "sd_ratio_n", "sd_ratio_phi", "coherence_ratio", "iterations", "converged",
];

function parseNumber(token: string): number {
  if (token === "inf") return Infinity;
  if (token === "-inf") return -Infinity;
  const value = Number(token);
  if (token === "" || Number.isNaN(value) && token !== "nan") {
    throw new Error(`unparseable numeric cell: ${JSON.stringify(token)}`);
  }
  return value;
}

function splitTable(text: string): { header: string[]; rows: string[][] } {
  const lines = text.split("\n").filter((line) => line.length > 0 && !line.startsWith("#"));
  if (lines.length < 1) throw new Error("empty table");
  const header = lines[0].split(",");
  return { header, rows: lines.slice(1).map((line) => line.split(",")) };
}

function requireColumns(header: string[], needed: string[], path: string): Map<string, number> {
  const index = new Map(header.map((name, i) => [name, i]));
  const missing = needed.filter((name) => !index.has(name));
  if (missing.length > 0) {
    throw new Error(`${path}: missing column(s) ${missing.join(", ")}`);
  }
  return index;
}

/** Read a sweep CSV, validating that every schema column is present. */
export function readSweepCsv(path: string): SweepRow[] {
  const { header, rows } = splitTable(readFileSync(path, "utf-8"));
  const index = requireColumns(header, SWEEP_COLUMNS as string[], path);
  return rows.map((cells) => {
    const get = (name: string) => cells[index.get(name)!];
    const row: Partial<Record<keyof SweepRow, unknown>> = {};
    for (const name of SWEEP_COLUMNS) {
      if (name === "converged") row[name] = get(name) === "true";
      else if (name === "iterations") row[name] = parseInt(get(name), 10);
      else row[name] = parseNumber(get(name));
    }
    return row as SweepRow;
  });
}

/** Phase-density table: phi, prob and optionally a coherent reference. */
export interface PhaseTable {
  phi: number[];
  prob: number[];
  probCoherent?: number[];
}

export function readPhaseCsv(path: string): PhaseTable {
  const { header, rows } = splitTable(readFileSync(path, "utf-8"));
  const index = requireColumns(header, ["phi", "prob"], path);
  const table: PhaseTable = {
    phi: rows.map((cells) => parseNumber(cells[index.get("phi")!])),
    prob: rows.map((cells) => parseNumber(cells[index.get("prob")!])),
  };
  if (index.has("prob_coherent")) {
    table.probCoherent = rows.map((cells) => parseNumber(cells[index.get("prob_coherent")!]));
  }
  return table;
}

/** Long-format Wigner table reassembled into axes plus a value matrix. */
export interface WignerTable {
  x: number[];
  p: number[];
  /** values[i][j] = W(x[i], p[j]) */
  values: number[][];
  convention: string;
}

export function readWignerCsv(path: string): WignerTable {
  const text = readFileSync(path, "utf-8");
  const conventionLine = text
    .split("\n")
    .find((line) => line.startsWith("# convention:"));
  const { header, rows } = splitTable(text);
  const index = requireColumns(header, ["x", "p", "w"], path);
  const xs: number[] = [];
  const ps: number[] = [];
  const seenX = new Set<number>();
  const seenP = new Set<number>();
  const cells = rows.map((row) => ({
    x: parseNumber(row[index.get("x")!]),
    p: parseNumber(row[index.get("p")!]),
    w: parseNumber(row[index.get("w")!]),
  }));
  for (const cell of cells) {
    if (!seenX.has(cell.x)) { seenX.add(cell.x); xs.push(cell.x); }
    if (!seenP.has(cell.p)) { seenP.add(cell.p); ps.push(cell.p); }
  }
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const pIndex = new Map(ps.map((v, i) => [v, i]));
  const values = xs.map(() => ps.map(() => NaN));
  for (const cell of cells) {
    values[xIndex.get(cell.x)!][pIndex.get(cell.p)!] = cell.w;
  }
  return { x: xs, p: ps, values, convention: conventionLine?.slice("# convention:".length).trim() ?? "" };
}

/** Pure-state document written by the optimizer. */
export interface StateDocument {
  dim: number;
  /** complex amplitudes as [re, im] pairs */
  coeffs: [number, number][];
}

export function readStateJson(path: string): StateDocument {
  const doc = JSON.parse(readFileSync(path, "utf-8"));
  if (typeof doc.dim !== "number" || !Array.isArray(doc.coeffs) || doc.coeffs.length !== doc.dim) {
    throw new Error(`${path}: not a pure-state document`);
  }
  return doc as StateDocument;
}

/** Number-basis populations |c_n|^2 of a state document. */
export function populations(state: StateDocument): number[] {
  return state.coeffs.map(([re, im]) => re * re + im * im);
}
