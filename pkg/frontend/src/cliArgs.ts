/**
 * Shared flag handling for the figure scripts: every script takes one or
 * more --input paths, one --out path, and an optional --no-png.
 */

import { parseArgs } from "node:util";

export interface ScriptArgs {
  inputs: string[];
  out: string;
  png: boolean;
  extra: Record<string, string | undefined>;
}

export function parseScriptArgs(
  argv: string[],
  extraFlags: string[] = [],
): ScriptArgs {
  const options: Record<string, { type: "string" | "boolean"; multiple?: boolean }> = {
    input: { type: "string", multiple: true },
    out: { type: "string" },
    "no-png": { type: "boolean" },
  };
  for (const flag of extraFlags) options[flag] = { type: "string" };
  const { values } = parseArgs({ args: argv, options, allowPositionals: false });
  const inputs = (values.input as string[] | undefined) ?? [];
  const out = values.out as string | undefined;
  if (!out) throw new Error("--out is required");
  if (inputs.length === 0) throw new Error("at least one --input is required");
  const extra: Record<string, string | undefined> = {};
  for (const flag of extraFlags) extra[flag] = values[flag] as string | undefined;
  return { inputs, out, png: !(values["no-png"] as boolean | undefined), extra };
}

export function runScript(body: () => void): void {
  try {
    body();
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    process.exitCode = 1;
  }
}
