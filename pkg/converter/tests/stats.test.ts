import * as fs from "node:fs";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { convertDataset } from "../src/convert.js";
import { parseArchive } from "../src/schema.js";
import { PUBLISHED_STATS, StatsMismatchError, computeStats, verifyStats } from "../src/stats.js";
import { miniFreeArchive } from "./fixtures.js";

describe("computeStats", () => {
  it("sums sessions, subjects, annotations and hours", () => {
    const stats = computeStats(miniFreeArchive());
    expect(stats.sessions).toBe(2);
    expect(stats.subjects).toBe(2);
    expect(stats.meals).toBe(4);
    expect(stats.bites).toBe(0);
    expect(stats.totalHours).toBeCloseTo((2 * 4) / 3600, 12);
  });
});

describe("verifyStats", () => {
  it("accepts exactly matching numbers", () => {
    verifyStats("FIC", {
      sessions: 21, subjects: 12, bites: 1332, meals: 0, totalHours: 4.1,
    });
    verifyStats("FreeFIC", {
      sessions: 16, subjects: 6, bites: 0, meals: 17, totalHours: 77.3227,
    });
    verifyStats("FreeFIC-heldout", {
      sessions: 6, subjects: 6, bites: 0, meals: 6, totalHours: 35.3914,
    });
  });

  it("lists every mismatching quantity", () => {
    try {
      verifyStats("FIC", {
        sessions: 20, subjects: 12, bites: 1300, meals: 0, totalHours: 4.1,
      });
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(StatsMismatchError);
      const message = (err as Error).message;
      expect(message).toMatch(/sessions: expected 21, got 20/);
      expect(message).toMatch(/bites: expected 1332, got 1300/);
    }
  });

  it("rejects total hours outside the tolerance", () => {
    expect(() =>
      verifyStats("FreeFIC", {
        sessions: 16, subjects: 6, bites: 0, meals: 17, totalHours: 77.4,
      }),
    ).toThrow(/total hours/);
  });
});

// Real-archive verification: runs only when the published archives have been
// exported and their paths provided; the rest of the suite never needs them.
const REAL = [
  { env: "FIC_ARCHIVE_JSON", tag: "FIC" as const },
  { env: "FREEFIC_ARCHIVE_JSON", tag: "FreeFIC" as const },
  { env: "FREEFIC_HELDOUT_ARCHIVE_JSON", tag: "FreeFIC-heldout" as const },
];

for (const { env, tag } of REAL) {
  const archivePath = process.env[env];
  describe.skipIf(!archivePath)(`published ${tag} archive`, () => {
    it(`matches the published ${tag} statistics`, () => {
      const raw = JSON.parse(fs.readFileSync(archivePath!, "utf-8"));
      const stats = computeStats(parseArchive(raw));
      verifyStats(tag, stats); // throws on any mismatch
      expect(stats.sessions).toBe(PUBLISHED_STATS[tag].sessions);
    });

    it("converts with verification enabled", () => {
      const out = fs.mkdtempSync(path.join(process.env.TMPDIR ?? "/tmp", "corpus-"));
      try {
        const manifest = convertDataset(archivePath!, out);
        expect(manifest.dataset).toBe(tag);
      } finally {
        fs.rmSync(out, { recursive: true, force: true });
      }
    });
  });
}
