/** Archive and manifest shapes used by the converter. */

export type DatasetTag = "FIC" | "FreeFIC" | "FreeFIC-heldout";

/** One session from the archive export: a 6-channel recording plus either
 *  bite intervals (in-meal sessions) or meal intervals (free-living). */
export interface ArchiveSession {
  subject_id: string;
  session_id: string;
  sample_rate_hz: number;
  hand: "L" | "R";
  units: string;
  /** rows of [ax, ay, az, gx, gy, gz] */
  signals: number[][];
  bites?: [number, number][];
  meals?: [number, number][];
}

export interface Archive {
  dataset: DatasetTag;
  sessions: ArchiveSession[];
}

export interface SessionRecord {
  subjectId: string;
  sessionId: string;
  kind: "meal" | "free";
  hand: "L" | "R";
  sampleCount: number;
  durationS: number;
  biteCount: number;
  mealCount: number;
  recordingFile: string;
  eventsFile: string;
}

export interface CorpusStats {
  sessions: number;
  subjects: number;
  bites: number;
  meals: number;
  totalHours: number;
}

export interface CorpusManifest {
  dataset: DatasetTag;
  sessions: SessionRecord[];
  stats: CorpusStats;
}
