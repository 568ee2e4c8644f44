/** Tolerant archive parsing with schema-drift reporting.
 *
 * Unknown extra fields are ignored; anything missing or of the wrong shape
 * raises a SchemaDriftError naming the offending field path, so a changed
 * dataset release fails loudly instead of converting garbage.
 */

import type { Archive, ArchiveSession, DatasetTag } from "./types.js";

export class SchemaDriftError extends Error {
  constructor(path: string, problem: string) {
    super(`schema drift: ${path} ${problem}`);
    this.name = "SchemaDriftError";
  }
}

const DATASET_TAGS: DatasetTag[] = ["FIC", "FreeFIC", "FreeFIC-heldout"];

function asObject(value: unknown, path: string): Record<string, unknown> {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new SchemaDriftError(path, "is not an object");
  }
  return value as Record<string, unknown>;
}

function requireField(obj: Record<string, unknown>, key: string, path: string): unknown {
  if (!(key in obj) || obj[key] === undefined || obj[key] === null) {
    throw new SchemaDriftError(`${path}.${key}`, "is missing");
  }
  return obj[key];
}

function asString(value: unknown, path: string): string {
  if (typeof value === "string") return value;
  if (typeof value === "number") return String(value); // ids exported as numbers
  throw new SchemaDriftError(path, "is not a string");
}

function asFiniteNumber(value: unknown, path: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaDriftError(path, "is not a finite number");
  }
  return value;
}

function asIntervals(value: unknown, path: string): [number, number][] {
  if (!Array.isArray(value)) {
    throw new SchemaDriftError(path, "is not an array");
  }
  return value.map((pair, i) => {
    if (!Array.isArray(pair) || pair.length !== 2) {
      throw new SchemaDriftError(`${path}[${i}]`, "is not a [start, end] pair");
    }
    const start = asFiniteNumber(pair[0], `${path}[${i}][0]`);
    const end = asFiniteNumber(pair[1], `${path}[${i}][1]`);
    if (!(start < end)) {
      throw new SchemaDriftError(`${path}[${i}]`, "has start >= end");
    }
    return [start, end];
  });
}

function parseSession(value: unknown, path: string): ArchiveSession {
  const obj = asObject(value, path);
  const subjectId = asString(requireField(obj, "subject_id", path), `${path}.subject_id`);
  const sessionId = asString(requireField(obj, "session_id", path), `${path}.session_id`);
  const fs = asFiniteNumber(requireField(obj, "sample_rate_hz", path), `${path}.sample_rate_hz`);
  if (fs <= 0) {
    throw new SchemaDriftError(`${path}.sample_rate_hz`, "is not positive");
  }
  const hand = requireField(obj, "hand", path);
  if (hand !== "L" && hand !== "R") {
    throw new SchemaDriftError(`${path}.hand`, "is not 'L' or 'R'");
  }
  const units = typeof obj.units === "string" ? obj.units : "";
  const signalsRaw = requireField(obj, "signals", path);
  if (!Array.isArray(signalsRaw) || signalsRaw.length === 0) {
    throw new SchemaDriftError(`${path}.signals`, "is not a non-empty array");
  }
  const signals = signalsRaw.map((row, i) => {
    if (!Array.isArray(row) || row.length !== 6) {
      throw new SchemaDriftError(`${path}.signals[${i}]`, "is not a 6-channel row");
    }
    return row.map((v, c) => asFiniteNumber(v, `${path}.signals[${i}][${c}]`));
  });
  const hasBites = "bites" in obj && obj.bites != null;
  const hasMeals = "meals" in obj && obj.meals != null;
  if (hasBites === hasMeals) {
    throw new SchemaDriftError(path, "needs exactly one of 'bites' or 'meals'");
  }
  const session: ArchiveSession = {
    subject_id: subjectId,
    session_id: sessionId,
    sample_rate_hz: fs,
    hand,
    units,
    signals,
  };
  if (hasBites) {
    session.bites = asIntervals(obj.bites, `${path}.bites`);
  } else {
    session.meals = asIntervals(obj.meals, `${path}.meals`);
  }
  return session;
}

export function parseArchive(raw: unknown): Archive {
  const obj = asObject(raw, "archive");
  const dataset = requireField(obj, "dataset", "archive");
  if (typeof dataset !== "string" || !DATASET_TAGS.includes(dataset as DatasetTag)) {
    throw new SchemaDriftError("archive.dataset", `is not one of ${DATASET_TAGS.join(", ")}`);
  }
  const sessionsRaw = requireField(obj, "sessions", "archive");
  if (!Array.isArray(sessionsRaw) || sessionsRaw.length === 0) {
    throw new SchemaDriftError("archive.sessions", "is not a non-empty array");
  }
  const sessions = sessionsRaw.map((s, i) => parseSession(s, `sessions[${i}]`));
  const ids = new Set<string>();
  for (const [i, s] of sessions.entries()) {
    if (ids.has(s.session_id)) {
      throw new SchemaDriftError(`sessions[${i}].session_id`, "is duplicated");
    }
    ids.add(s.session_id);
  }
  return { dataset: dataset as DatasetTag, sessions };
}
