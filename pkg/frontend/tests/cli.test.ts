import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { run } from "../src/cli";

const FIXTURES = fileURLToPath(new URL("../fixtures", import.meta.url));

let dir: string;
let logSpy: ReturnType<typeof vi.spyOn>;
let errSpy: ReturnType<typeof vi.spyOn>;

beforeEach(() => {
  dir = mkdtempSync(join(tmpdir(), "figures-"));
  logSpy = vi.spyOn(console, "log").mockImplementation(() => {});
  errSpy = vi.spyOn(console, "error").mockImplementation(() => {});
});

afterEach(() => {
  rmSync(dir, { recursive: true, force: true });
  vi.restoreAllMocks();
});

describe("run", () => {
  it("writes the requested figure and reports the path", () => {
    const out = join(dir, "fig4.svg");
    const code = run(["--csv", join(FIXTURES, "fig4.csv"), "--figure", "4", "--out", out]);
    expect(code).toBe(0);
    expect(logSpy).toHaveBeenCalledWith(`wrote figure 4 to ${out}`);
    const first = readFileSync(out, "utf8");
    expect(first.startsWith("<svg")).toBe(true);

    run(["--csv", join(FIXTURES, "fig4.csv"), "--figure", "4", "--out", out]);
    expect(readFileSync(out, "utf8")).toBe(first);
  });

  it("rejects missing flags with usage", () => {
    expect(run(["--csv", join(FIXTURES, "fig4.csv")])).toBe(2);
    expect(run([])).toBe(2);
    expect(errSpy.mock.calls.at(-1)?.[0]).toContain("usage:");
  });

  it("rejects unknown flags and odd argument lists", () => {
    const out = join(dir, "x.svg");
    expect(
      run(["--csv", join(FIXTURES, "fig4.csv"), "--figure", "4", "--out", out, "--zoom", "2"]),
    ).toBe(2);
    expect(run(["--csv", join(FIXTURES, "fig4.csv"), "--figure"])).toBe(2);
  });

  it("rejects a figure id outside 3..5", () => {
    const out = join(dir, "x.svg");
    expect(run(["--csv", join(FIXTURES, "fig4.csv"), "--figure", "7", "--out", out])).toBe(2);
    expect(errSpy.mock.calls.at(-1)?.[0]).toContain('unknown figure "7"');
  });

  it("reports an unreadable CSV path", () => {
    const out = join(dir, "x.svg");
    expect(run(["--csv", join(dir, "absent.csv"), "--figure", "4", "--out", out])).toBe(2);
    expect(errSpy.mock.calls.at(-1)?.[0]).toContain("cannot read");
  });

  it("exits 1 and names the column when the CSV is missing one", () => {
    const broken = join(dir, "broken.csv");
    const text = readFileSync(join(FIXTURES, "fig4.csv"), "utf8");
    writeFileSync(broken, text.replaceAll("T_avg", "avg"));
    const out = join(dir, "x.svg");
    expect(run(["--csv", broken, "--figure", "4", "--out", out])).toBe(1);
    expect(errSpy.mock.calls.at(-1)?.[0]).toContain("missing column: T_avg");
  });
});
