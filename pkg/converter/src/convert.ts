/** Archive -> canonical corpus conversion.
 *
 * Emits one recording file and one events file per session, a LOSO manifest
 * grouped by subject, and a stats summary. The analysis pipeline never reads
 * the archive format; these files are the only contract between the two.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { eventsFileText, manifestJson, recordingFileText } from "./formats.js";
import { parseArchive } from "./schema.js";
import { computeStats, verifyStats } from "./stats.js";
import type { CorpusManifest, DatasetTag, SessionRecord } from "./types.js";

export interface ConvertOptions {
  /** Verify computed statistics against the published numbers for this tag
   *  (defaults to the archive's own dataset tag; null skips verification). */
  verifyAgainst?: DatasetTag | null;
}

export function convertDataset(
  archivePath: string,
  outDir: string,
  options: ConvertOptions = {},
): CorpusManifest {
  const raw = JSON.parse(fs.readFileSync(archivePath, "utf-8"));
  const archive = parseArchive(raw);
  fs.mkdirSync(outDir, { recursive: true });

  const records: SessionRecord[] = [];
  for (const session of archive.sessions) {
    const base = session.session_id.replace(/[^A-Za-z0-9_.-]/g, "_");
    const recordingFile = `${base}.csv`;
    const eventsFile = `${base}.events.jsonl`;
    fs.writeFileSync(path.join(outDir, recordingFile), recordingFileText(session));
    fs.writeFileSync(path.join(outDir, eventsFile), eventsFileText(session));
    records.push({
      subjectId: session.subject_id,
      sessionId: session.session_id,
      kind: session.bites ? "meal" : "free",
      hand: session.hand,
      sampleCount: session.signals.length,
      durationS: session.signals.length / session.sample_rate_hz,
      biteCount: session.bites?.length ?? 0,
      mealCount: session.meals?.length ?? 0,
      recordingFile,
      eventsFile,
    });
  }

  const stats = computeStats(archive);
  const verifyTag = options.verifyAgainst === undefined
    ? archive.dataset
    : options.verifyAgainst;
  if (verifyTag !== null) {
    verifyStats(verifyTag, stats);
  }

  const manifest: CorpusManifest = { dataset: archive.dataset, sessions: records, stats };
  fs.writeFileSync(path.join(outDir, "manifest.json"), manifestJson(records));
  fs.writeFileSync(
    path.join(outDir, "corpus.json"),
    JSON.stringify(manifest, null, 2) + "\n",
  );
  return manifest;
}
