/** Writers for the canonical on-disk formats the analysis pipeline reads.
 *
 * Recording files: one `fs_hz=<num>,hand=<L|R>,units=<text>` header line,
 * then CSV rows `t,ax,ay,az,gx,gy,gz` with t in seconds (uniform grid).
 * Event files: JSON lines with a header record first, events sorted by time.
 */

import type { ArchiveSession } from "./types.js";

export function recordingFileText(session: ArchiveSession): string {
  const lines: string[] = [
    `fs_hz=${session.sample_rate_hz},hand=${session.hand},units=${session.units}`,
  ];
  const fs = session.sample_rate_hz;
  for (let i = 0; i < session.signals.length; i++) {
    const t = (i / fs).toFixed(9);
    lines.push(`${t},${session.signals[i].join(",")}`);
  }
  return lines.join("\n") + "\n";
}

export function eventsFileText(session: ArchiveSession): string {
  const lines: string[] = [JSON.stringify({ format: "events", version: 1 })];
  const kind = session.bites ? "bite" : "meal";
  const intervals = (session.bites ?? session.meals ?? [])
    .slice()
    .sort((a, b) => a[0] - b[0]);
  if (kind === "meal") {
    for (let i = 1; i < intervals.length; i++) {
      if (intervals[i][0] < intervals[i - 1][1]) {
        throw new Error(
          `session ${session.session_id}: overlapping meal annotations`,
        );
      }
    }
  }
  for (const [start, end] of intervals) {
    lines.push(JSON.stringify({ kind, start_s: start, end_s: end }));
  }
  return lines.join("\n") + "\n";
}

/** LOSO manifest in the layout the pipeline's `loso`/`train` commands load:
 *  sessions grouped per subject with paths relative to the manifest. */
export function manifestJson(
  sessions: {
    subjectId: string;
    kind: "meal" | "free";
    recordingFile: string;
    eventsFile: string;
  }[],
): string {
  const bySubject = new Map<string, typeof sessions>();
  for (const s of sessions) {
    const bucket = bySubject.get(s.subjectId) ?? [];
    bucket.push(s);
    bySubject.set(s.subjectId, bucket);
  }
  const subjects = [...bySubject.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([id, sess]) => ({
      id,
      sessions: sess.map((s) => ({
        kind: s.kind,
        recording: s.recordingFile,
        events: s.eventsFile,
      })),
    }));
  return JSON.stringify({ subjects }, null, 2) + "\n";
}
