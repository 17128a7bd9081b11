/**
 * `render` command: read a harness CSV, build the figure for its kind, and
 * write an SVG. Exits nonzero (without writing anything) on unreadable
 * input, schema mismatches, or empty data.
 */

import fs from "node:fs";
import path from "node:path";

import yargs from "yargs";

import { FigureKind, fig2Option, fig3Option, fig4Option, fig5Option } from "./figures.js";
import { renderSvg } from "./render.js";
import { SchemaError, parseDistCsv, parseSweepCsv } from "./schema.js";

export const KINDS: FigureKind[] = ["fig2", "fig3", "fig4", "fig5"];

export function buildOption(kind: FigureKind, csvText: string) {
  if (kind === "fig2") {
    return fig2Option(parseDistCsv(csvText));
  }
  const rows = parseSweepCsv(csvText);
  if (kind === "fig3") {
    return fig3Option(rows);
  }
  if (kind === "fig4") {
    return fig4Option(rows);
  }
  return fig5Option(rows);
}

export interface RenderArgs {
  kind: FigureKind;
  in: string;
  out: string;
}

export function runRender(args: RenderArgs): number {
  let csvText: string;
  try {
    csvText = fs.readFileSync(args.in, "utf8");
  } catch (err) {
    console.error(`error: cannot read ${args.in}: ${(err as Error).message}`);
    return 1;
  }
  let svg: string;
  try {
    svg = renderSvg(buildOption(args.kind, csvText));
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${args.in}: ${err.message}`);
      return 1;
    }
    throw err;
  }
  fs.mkdirSync(path.dirname(path.resolve(args.out)), { recursive: true });
  fs.writeFileSync(args.out, svg);
  console.log(`wrote ${args.out}`);
  return 0;
}

class UsageError extends Error {}

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  const parser = yargs(argv)
    .scriptName("lowcoh-figures")
    .command(
      "render",
      "render a figure from a harness CSV",
      (cmd) =>
        cmd
          .option("kind", {
            choices: KINDS,
            demandOption: true,
            describe: "which figure the CSV feeds",
          })
          .option("in", {
            type: "string",
            demandOption: true,
            describe: "input CSV path",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output SVG path",
          }),
      (args) => {
        exitCode = runRender({ kind: args.kind, in: args.in, out: args.out });
      }
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      // with exitProcess(false) yargs would keep going after a bad usage
      // message and still run the handler; throwing is the only way to stop
      if (err) throw err;
      throw new UsageError(msg);
    })
    .exitProcess(false);
  try {
    await parser.parseAsync();
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return exitCode;
}
