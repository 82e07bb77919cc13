# midi.py
#
# Standard MIDI File export of melodies.
#
# Date: 2026-09-22

from typing import Optional, Iterable
from dataclasses import dataclass, field
import io

import mido

from .errors import OutOfRange, UnmappedLabel
from .melody import Melody

__all__ = [
    "TICKS_PER_BEAT",
    "TEMPO",
    "NoteMap",
    "ticks_per_second",
    "export_midi",
    "write_midi",
    "note_on_ticks",
]

TICKS_PER_BEAT = 480
TEMPO = 500_000
"""Microseconds per quarter note (120 beats per minute)."""

DEFAULT_BASE_KEY = 60
SCALE_STEPS = (0, 2, 4, 5, 7, 9, 11)


def ticks_per_second() -> float:
    return TICKS_PER_BEAT * 1_000_000 / TEMPO


@dataclass(frozen=True)
class NoteMap:
    """Assignment of MIDI keys to note labels."""
    keys: dict[str, int] = field(default_factory=dict)
    time_scale: float = 1.0
    """Seconds per unit of hyperbolic length."""
    velocity: int = 100
    duration: float = 0.1
    """Note length in seconds."""

    def __post_init__(self):
        for label, key in self.keys.items():
            if not (0 <= key <= 127):
                raise OutOfRange(f"MIDI key {key} of label '{label}' is not in 0..127", key)
        if not (self.time_scale > 0.0):
            raise OutOfRange(f"Time scale must be positive, got {self.time_scale}",
                             self.time_scale)
        if not (1 <= self.velocity <= 127):
            raise OutOfRange(f"Velocity {self.velocity} is not in 1..127", self.velocity)
        if not (self.duration > 0.0):
            raise OutOfRange(f"Note duration must be positive, got {self.duration}",
                             self.duration)

    @classmethod
    def from_labels(cls, labels: Iterable[str], base: int = DEFAULT_BASE_KEY,
                    **kwargs) -> "NoteMap":
        """Labels mapped to consecutive keys of the major scale from
        `base`."""
        keys: dict[str, int] = {}
        for i, label in enumerate(labels):
            octave, step = divmod(i, len(SCALE_STEPS))
            keys[label] = base + 12 * octave + SCALE_STEPS[step]
        return cls(keys=keys, **kwargs)

    @classmethod
    def parse(cls, text: str, **kwargs) -> "NoteMap":
        """Parse `label=key` pairs separated by commas."""
        keys: dict[str, int] = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            label, sep, key = item.partition("=")
            if not sep:
                raise OutOfRange(f"Note map item '{item}' is not of the form label=key", item)
            try:
                keys[label.strip()] = int(key)
            except ValueError:
                raise OutOfRange(f"MIDI key '{key}' of label '{label}' is not an integer", key)
        return cls(keys=keys, **kwargs)

    def key(self, label: str) -> int:
        try:
            return self.keys[label]
        except KeyError:
            raise UnmappedLabel(label)


def _events(m: Melody, note_map: NoteMap) -> list[tuple[int, float, mido.Message]]:
    rate = ticks_per_second()
    length = max(1, round(note_map.duration * rate))
    notes = [(round(time * note_map.time_scale * rate), note_map.key(label))
             for label, time in zip(m.labels, m.times.tolist())]
    # a repeated key ends the sounding note of that key
    next_on: dict[int, int] = {}
    stops: list[int] = []
    for tick, key in reversed(notes):
        stops.append(min(tick + length, next_on.get(key, tick + length)))
        next_on[key] = tick
    stops.reverse()

    events: list[tuple[int, float, mido.Message]] = []
    for (tick, key), stop in zip(notes, stops):
        if stop <= tick:
            continue
        # note off sorts before note on at the same tick
        events.append((tick, 0.2, mido.Message("note_on", note=key,
                                               velocity=note_map.velocity)))
        events.append((stop, 0.1, mido.Message("note_off", note=key, velocity=0)))
    events.sort(key=lambda event: (event[0], event[1]))
    return events


def export_midi(m: Melody, note_map: NoteMap, name: Optional[str] = None) -> bytes:
    """Render a melody as a format 0 Standard MIDI File.

    Raises `UnmappedLabel` if a label of the melody has no key.
    """
    for label in set(m.labels):
        note_map.key(label)

    midi = mido.MidiFile(type=0, ticks_per_beat=TICKS_PER_BEAT)
    track = mido.MidiTrack()
    midi.tracks.append(track)
    if name is not None:
        track.append(mido.MetaMessage("track_name", name=name, time=0))
    track.append(mido.MetaMessage("set_tempo", tempo=TEMPO, time=0))

    previous = 0
    for tick, _, message in _events(m, note_map):
        track.append(message.copy(time=tick - previous))
        previous = tick
    track.append(mido.MetaMessage("end_of_track", time=0))

    buffer = io.BytesIO()
    midi.save(file=buffer)
    return buffer.getvalue()


def write_midi(m: Melody, note_map: NoteMap, path: str, name: Optional[str] = None):
    data = export_midi(m, note_map, name)
    with open(path, "wb") as file:
        file.write(data)


def note_on_ticks(data: bytes) -> list[tuple[int, int]]:
    """Absolute `(tick, key)` of the note-on events of a MIDI file."""
    midi = mido.MidiFile(file=io.BytesIO(data))
    result: list[tuple[int, int]] = []
    for track in midi.tracks:
        tick = 0
        for message in track:
            tick += message.time
            if message.type == "note_on" and message.velocity > 0:
                result.append((tick, message.note))
    return result
