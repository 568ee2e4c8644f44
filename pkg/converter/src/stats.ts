/** Corpus statistics and their verification against the published tables. */

import type { Archive, CorpusStats, DatasetTag } from "./types.js";

export const PUBLISHED_STATS: Record<
  DatasetTag,
  { sessions: number; subjects: number; bites?: number; meals?: number; totalHours?: number }
> = {
  FIC: { sessions: 21, subjects: 12, bites: 1332 },
  FreeFIC: { sessions: 16, subjects: 6, meals: 17, totalHours: 77.32 },
  "FreeFIC-heldout": { sessions: 6, subjects: 6, meals: 6, totalHours: 35.39 },
};

const HOURS_TOLERANCE = 0.01;

export function computeStats(archive: Archive): CorpusStats {
  let bites = 0;
  let meals = 0;
  let totalSeconds = 0;
  const subjects = new Set<string>();
  for (const s of archive.sessions) {
    subjects.add(s.subject_id);
    bites += s.bites?.length ?? 0;
    meals += s.meals?.length ?? 0;
    totalSeconds += s.signals.length / s.sample_rate_hz;
  }
  return {
    sessions: archive.sessions.length,
    subjects: subjects.size,
    bites,
    meals,
    totalHours: totalSeconds / 3600,
  };
}

export class StatsMismatchError extends Error {
  constructor(problems: string[]) {
    super(`corpus statistics mismatch: ${problems.join("; ")}`);
    this.name = "StatsMismatchError";
  }
}

/** Compare computed statistics against the published numbers for the tag.
 *  Counts must match exactly; total hours within ${HOURS_TOLERANCE} h. */
export function verifyStats(tag: DatasetTag, stats: CorpusStats): void {
  const expected = PUBLISHED_STATS[tag];
  const problems: string[] = [];
  if (stats.sessions !== expected.sessions) {
    problems.push(`sessions: expected ${expected.sessions}, got ${stats.sessions}`);
  }
  if (stats.subjects !== expected.subjects) {
    problems.push(`subjects: expected ${expected.subjects}, got ${stats.subjects}`);
  }
  if (expected.bites !== undefined && stats.bites !== expected.bites) {
    problems.push(`bites: expected ${expected.bites}, got ${stats.bites}`);
  }
  if (expected.meals !== undefined && stats.meals !== expected.meals) {
    problems.push(`meals: expected ${expected.meals}, got ${stats.meals}`);
  }
  if (
    expected.totalHours !== undefined &&
    Math.abs(stats.totalHours - expected.totalHours) > HOURS_TOLERANCE
  ) {
    problems.push(
      `total hours: expected ~${expected.totalHours}, got ${stats.totalHours.toFixed(3)}`,
    );
  }
  if (problems.length > 0) {
    throw new StatsMismatchError(problems);
  }
}
