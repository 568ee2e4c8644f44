"""Canonical on-disk formats: recordings, event lists, LOSO manifests.

Recording files carry one header line ``fs_hz=<num>,hand=<L|R>,units=<text>``
followed by CSV rows ``t,ax,ay,az,gx,gy,gz`` with t in seconds. Event files
are JSON lines: a header record first, then one record per event, sorted by
time. Bites may be instants (detections, ``start_s`` only) or intervals
(annotations); meals always carry ``start_s`` and ``end_s``. All writes are
atomic (temp file + rename).
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bites import BiteSet
from .imu import ImuRecording
from .meals import MealIntervalSet
from .windows import BiteAnnotation, MealAnnotation

EVENTS_HEADER = {"format": "events", "version": 1}
_HEADER_RE = re.compile(r"^fs_hz=([^,]+),hand=([LR]),units=(.*)$")
_TIME_TOL_S = 1e-6


class DataFormatError(ValueError):
    """Raised when an input file violates its format contract."""


@dataclass(frozen=True)
class Event:
    kind: str  # "bite" | "meal"
    start_s: float
    end_s: float | None = None

    def __post_init__(self):
        if self.kind not in ("bite", "meal"):
            raise DataFormatError(f"unknown event kind {self.kind!r}")
        if self.kind == "meal" and self.end_s is None:
            raise DataFormatError("meal events require end_s")
        if self.end_s is not None and not self.end_s > self.start_s:
            raise DataFormatError("event end must exceed start")


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_recording(path: str | Path, rec: ImuRecording) -> None:
    lines = [f"fs_hz={rec.sample_rate_hz:.10g},hand={rec.handedness},units={rec.units}"]
    times = rec.times()
    for i in range(rec.num_samples):
        row = ",".join(f"{v:.9g}" for v in rec.data[i])
        lines.append(f"{times[i]:.9f},{row}")
    _atomic_write(path, "\n".join(lines) + "\n")


def load_recording(path: str | Path) -> ImuRecording:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        match = _HEADER_RE.match(header)
        if not match:
            raise DataFormatError("bad header")
        try:
            fs = float(match.group(1))
        except ValueError as exc:
            raise DataFormatError("bad header") from exc
        hand, units = match.group(2), match.group(3)
        times = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise DataFormatError(f"malformed row {lineno}")
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise DataFormatError(f"malformed row {lineno}") from exc
            times.append(vals[0])
            rows.append(vals[1:])
    if not rows:
        raise DataFormatError("recording file has no samples")
    t = np.asarray(times)
    if t.size > 1:
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise DataFormatError("non-monotone timestamps")
        if np.any(np.abs(dt - 1.0 / fs) > _TIME_TOL_S):
            raise DataFormatError("non-uniform timestamps")
    try:
        return ImuRecording(np.asarray(rows), fs, hand, units)
    except ValueError as exc:
        raise DataFormatError(str(exc)) from exc


def write_events(path: str | Path, events: list[Event]) -> None:
    _validate_events(events)
    lines = [json.dumps(EVENTS_HEADER)]
    for ev in events:
        rec: dict = {"kind": ev.kind, "start_s": ev.start_s}
        if ev.end_s is not None:
            rec["end_s"] = ev.end_s
        lines.append(json.dumps(rec))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_events(path: str | Path) -> list[Event]:
    with open(path) as fh:
        lines = [line for line in (l.strip() for l in fh) if line]
    if not lines:
        raise DataFormatError("events file is empty (missing header)")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DataFormatError("bad events header") from exc
    if head.get("format") != "events":
        raise DataFormatError("bad events header")
    if head.get("version") != EVENTS_HEADER["version"]:
        raise DataFormatError("unsupported events version")
    events = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
            events.append(Event(rec["kind"], float(rec["start_s"]),
                                float(rec["end_s"]) if "end_s" in rec else None))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataFormatError):
                raise
            raise DataFormatError(f"malformed event at line {lineno}") from exc
    _validate_events(events)
    return events


def _validate_events(events: list[Event]) -> None:
    starts = [ev.start_s for ev in events]
    if starts != sorted(starts):
        raise DataFormatError("events must be sorted by time")
    meals = [ev for ev in events if ev.kind == "meal"]
    for a, b in zip(meals, meals[1:]):
        if b.start_s < a.end_s:
            raise DataFormatError("overlapping meals")


# conversions between event records and in-memory types

def events_from(
    bites: BiteSet | None = None,
    bite_intervals: list[BiteAnnotation] | None = None,
    meals: list[MealAnnotation] | MealIntervalSet | None = None,
) -> list[Event]:
    events: list[Event] = []
    if bites is not None:
        events += [Event("bite", float(t)) for t in bites.timestamps_s]
    if bite_intervals is not None:
        events += [Event("bite", b.start_s, b.end_s) for b in bite_intervals]
    if meals is not None:
        if isinstance(meals, MealIntervalSet):
            events += [Event("meal", float(s), float(e)) for s, e in meals.intervals]
        else:
            events += [Event("meal", m.start_s, m.end_s) for m in meals]
    return sorted(events, key=lambda ev: ev.start_s)


def bite_times(events: list[Event]) -> BiteSet:
    """Detected bite instants; interval bites contribute their end moment."""
    ts = sorted(
        ev.start_s if ev.end_s is None else ev.end_s
        for ev in events
        if ev.kind == "bite"
    )
    return BiteSet(np.unique(ts))


def bite_intervals(events: list[Event]) -> list[BiteAnnotation]:
    out = []
    for ev in events:
        if ev.kind != "bite":
            continue
        if ev.end_s is None:
            raise DataFormatError("bite annotations require start and end")
        out.append(BiteAnnotation(ev.start_s, ev.end_s))
    return out


def meal_annotations(events: list[Event]) -> list[MealAnnotation]:
    return [MealAnnotation(ev.start_s, ev.end_s)
            for ev in events if ev.kind == "meal"]


def meal_intervals(events: list[Event]) -> MealIntervalSet:
    pairs = [(ev.start_s, ev.end_s) for ev in events if ev.kind == "meal"]
    if not pairs:
        return MealIntervalSet.empty()
    return MealIntervalSet.from_pairs(pairs)


# LOSO manifest

@dataclass(frozen=True)
class Session:
    kind: str  # "meal" | "free"
    recording: str
    events: str

    def __post_init__(self):
        if self.kind not in ("meal", "free"):
            raise DataFormatError(f"unknown session kind {self.kind!r}")


@dataclass(frozen=True)
class Subject:
    subject_id: str
    sessions: tuple[Session, ...]


def load_manifest(path: str | Path) -> list[Subject]:
    base = Path(path).parent
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"manifest is not valid JSON: {exc}") from exc
    try:
        subjects = []
        for sub in raw["subjects"]:
            sessions = tuple(
                Session(
                    kind=sess["kind"],
                    recording=str(base / sess["recording"]),
                    events=str(base / sess["events"]),
                )
                for sess in sub["sessions"]
            )
            subjects.append(Subject(str(sub["id"]), sessions))
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"manifest missing field: {exc}") from exc
    if not subjects:
        raise DataFormatError("manifest lists no subjects")
    return subjects


def write_manifest(path: str | Path, subjects: list[Subject]) -> None:
    base = Path(path).parent
    payload = {
        "subjects": [
            {
                "id": sub.subject_id,
                "sessions": [
                    {
                        "kind": sess.kind,
                        "recording": os.path.relpath(sess.recording, base),
                        "events": os.path.relpath(sess.events, base),
                    }
                    for sess in sub.sessions
                ],
            }
            for sub in subjects
        ]
    }
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")
