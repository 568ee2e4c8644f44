/** Miniature archive builders for tests. */

import type { Archive, ArchiveSession } from "../src/types.js";

export function mealSession(
  subject: string,
  session: string,
  seconds = 2,
  fs = 10,
): ArchiveSession {
  const n = Math.round(seconds * fs);
  const signals = Array.from({ length: n }, (_, i) => [
    Math.sin(i / 7), 0.1 * i, -0.5, 0.01 * i, 1.25, -0.25,
  ]);
  return {
    subject_id: subject,
    session_id: session,
    sample_rate_hz: fs,
    hand: "R",
    units: "m/s^2,rad/s",
    signals,
    bites: [[0.2, 0.9], [1.1, 1.8]],
  };
}

export function freeSession(
  subject: string,
  session: string,
  seconds = 4,
  fs = 10,
): ArchiveSession {
  const n = Math.round(seconds * fs);
  const signals = Array.from({ length: n }, (_, i) => [
    0.0, 0.0, 1.0, 0.05 * Math.cos(i / 9), 0.0, 0.0,
  ]);
  return {
    subject_id: subject,
    session_id: session,
    sample_rate_hz: fs,
    hand: "L",
    units: "g,deg/s",
    signals,
    meals: [[0.5, 2.0], [2.5, 3.5]],
  };
}

export function miniFicArchive(): Archive {
  return {
    dataset: "FIC",
    sessions: [
      mealSession("1", "fic_1_1"),
      mealSession("1", "fic_1_2"),
      mealSession("2", "fic_2_1"),
    ],
  };
}

export function miniFreeArchive(): Archive {
  return {
    dataset: "FreeFIC",
    sessions: [freeSession("1", "ffic_1_1"), freeSession("2", "ffic_2_1")],
  };
}
