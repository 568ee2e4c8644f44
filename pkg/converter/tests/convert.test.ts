import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { convertDataset } from "../src/convert.js";
import { StatsMismatchError } from "../src/stats.js";
import { miniFicArchive, miniFreeArchive } from "./fixtures.js";

let dir: string;

beforeEach(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "converter-"));
});

afterEach(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

function writeArchive(archive: object): string {
  const p = path.join(dir, "archive.json");
  fs.writeFileSync(p, JSON.stringify(archive));
  return p;
}

describe("convertDataset", () => {
  it("emits one recording and one events file per session", () => {
    const out = path.join(dir, "out");
    const manifest = convertDataset(writeArchive(miniFicArchive()), out, {
      verifyAgainst: null,
    });
    expect(manifest.sessions).toHaveLength(3);
    for (const record of manifest.sessions) {
      expect(fs.existsSync(path.join(out, record.recordingFile))).toBe(true);
      expect(fs.existsSync(path.join(out, record.eventsFile))).toBe(true);
    }
    expect(fs.existsSync(path.join(out, "manifest.json"))).toBe(true);
    expect(fs.existsSync(path.join(out, "corpus.json"))).toBe(true);
  });

  it("preserves sample counts per session", () => {
    const archive = miniFicArchive();
    const out = path.join(dir, "out");
    const manifest = convertDataset(writeArchive(archive), out, {
      verifyAgainst: null,
    });
    for (const [i, record] of manifest.sessions.entries()) {
      const text = fs.readFileSync(path.join(out, record.recordingFile), "utf-8");
      const rows = text.trimEnd().split("\n").length - 1;
      expect(rows).toBe(archive.sessions[i].signals.length);
      expect(record.sampleCount).toBe(archive.sessions[i].signals.length);
    }
  });

  it("computes corpus statistics", () => {
    const manifest = convertDataset(
      writeArchive(miniFicArchive()),
      path.join(dir, "out"),
      { verifyAgainst: null },
    );
    expect(manifest.stats.sessions).toBe(3);
    expect(manifest.stats.subjects).toBe(2);
    expect(manifest.stats.bites).toBe(6);
    expect(manifest.stats.meals).toBe(0);
    expect(manifest.stats.totalHours).toBeCloseTo((3 * 2) / 3600, 9);
  });

  it("marks free-living sessions in the manifest", () => {
    const out = path.join(dir, "out");
    convertDataset(writeArchive(miniFreeArchive()), out, { verifyAgainst: null });
    const manifest = JSON.parse(
      fs.readFileSync(path.join(out, "manifest.json"), "utf-8"),
    );
    const kinds = manifest.subjects.flatMap(
      (s: { sessions: { kind: string }[] }) => s.sessions.map((x) => x.kind),
    );
    expect(kinds).toEqual(["free", "free"]);
  });

  it("fails against published statistics for a mini archive", () => {
    // a 3-session fixture cannot match the published 21-session corpus
    expect(() =>
      convertDataset(writeArchive(miniFicArchive()), path.join(dir, "out")),
    ).toThrow(StatsMismatchError);
  });

  it("reports schema drift with the field path", () => {
    const raw = JSON.parse(JSON.stringify(miniFicArchive()));
    delete raw.sessions[2].signals;
    expect(() =>
      convertDataset(writeArchive(raw), path.join(dir, "out"), {
        verifyAgainst: null,
      }),
    ).toThrow(/sessions\[2\]\.signals/);
  });

  it("sanitizes session ids used as file names", () => {
    const archive = miniFicArchive();
    archive.sessions[0].session_id = "fic/1 1";
    const out = path.join(dir, "out");
    const manifest = convertDataset(writeArchive(archive), out, {
      verifyAgainst: null,
    });
    expect(manifest.sessions[0].recordingFile).toBe("fic_1_1.csv");
    expect(fs.existsSync(path.join(out, "fic_1_1.csv"))).toBe(true);
  });
});
