/**
 * CSV contracts for the harness artifacts.
 *
 * Sweep CSVs (fig3/fig4/fig5) carry one row per (axis value, codebook) cell;
 * distribution CSVs (fig2) carry one row per permutation draw plus summary
 * marker rows (draw = -1) for the proposed value, mean, min, and max.
 */

import Papa from "papaparse";
import { z } from "zod";

export class SchemaError extends Error {}

const numeric = z.coerce.number();

export const sweepRow = z.object({
  axis: z.string(),
  value: numeric,
  codebook: z.string(),
  m: numeric.pipe(z.number().int()),
  nmse: numeric,
  nmse_db: numeric,
  stderr: numeric,
  trials: numeric.pipe(z.number().int()),
  seed: numeric.pipe(z.number().int()),
});

export const distRow = z.object({
  m_x: numeric.pipe(z.number().int()),
  kind: z.string(),
  draw: numeric.pipe(z.number().int()),
  mu: numeric,
});

export type SweepRow = z.infer<typeof sweepRow>;
export type DistRow = z.infer<typeof distRow>;

export const SWEEP_COLUMNS = Object.keys(sweepRow.shape);
export const DIST_COLUMNS = Object.keys(distRow.shape);

function parseCsv(text: string): { columns: string[]; records: Record<string, string>[] } {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`CSV parse error: ${first.message} (row ${first.row})`);
  }
  return { columns: parsed.meta.fields ?? [], records: parsed.data };
}

function requireColumns(columns: string[], expected: string[]): void {
  for (const name of expected) {
    if (!columns.includes(name)) {
      throw new SchemaError(`missing column: ${name}`);
    }
  }
}

function parseRows<T>(text: string, expected: string[], row: z.ZodType<T>): T[] {
  const { columns, records } = parseCsv(text);
  requireColumns(columns, expected);
  if (records.length === 0) {
    throw new SchemaError("CSV contains no data rows");
  }
  return records.map((record, i) => {
    const result = row.safeParse(record);
    if (!result.success) {
      const issue = result.error.issues[0];
      throw new SchemaError(
        `row ${i + 1}: bad value for column ${String(issue.path[0])}`
      );
    }
    return result.data;
  });
}

export function parseSweepCsv(text: string): SweepRow[] {
  return parseRows(text, SWEEP_COLUMNS, sweepRow);
}

export function parseDistCsv(text: string): DistRow[] {
  return parseRows(text, DIST_COLUMNS, distRow);
}
