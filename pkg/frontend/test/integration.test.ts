import { mkdtempSync, existsSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { beforeEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli";

// fixtures are unmodified `lowcoh reproduce` output for a small geometry
const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "fixtures");
const KINDS = ["fig2", "fig3", "fig4", "fig5"] as const;

let dir: string;

beforeEach(() => {
  dir = mkdtempSync(join(tmpdir(), "figures-int-"));
  vi.spyOn(console, "log").mockImplementation(() => {});
});

describe("rendering real harness artifacts", () => {
  for (const kind of KINDS) {
    it(`renders ${kind}.csv`, async () => {
      const out = join(dir, `${kind}.svg`);
      const code = await main([
        "render",
        "--kind",
        kind,
        "--in",
        join(FIXTURES, `${kind}.csv`),
        "--out",
        out,
      ]);
      expect(code).toBe(0);
      expect(existsSync(out)).toBe(true);
      expect(readFileSync(out, "utf8")).toMatch(/^<svg/);
    });
  }

  it("rejects a figure CSV fed to the wrong kind", async () => {
    const out = join(dir, "wrong.svg");
    vi.spyOn(console, "error").mockImplementation(() => {});
    const code = await main([
      "render",
      "--kind",
      "fig4",
      "--in",
      join(FIXTURES, "fig3.csv"),
      "--out",
      out,
    ]);
    expect(code).toBe(1);
    expect(existsSync(out)).toBe(false);
  });
});
