"""Semantic scanpath: an utterance paired with its concurrent gaze history.

The canonical text block rendered here is the wire format embedded in
agent user messages and stored in turn records:

    Speech input: "Can you help me with this?"
    Gaze history:
    1. [the_robot] 1.00s
    2. [cereal_box, bowl] 1.20s

Durations are seconds with two decimals, round-half-up.  The pairing of
speech and gaze is loose: word timestamps are kept for logs and UI but are
never rendered into the prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import InputError, ParseError
from .segmentation import FixationSegment, GazeHistory


def _squash(s: str) -> str:
    return "".join(s.split())


@dataclass(frozen=True)
class Utterance:
    """Transcribed speech for one turn, optionally with word timestamps."""

    text: str
    turn_window: tuple[float, float]
    words: tuple[tuple[str, float, float], ...] | None = None

    def __post_init__(self):
        start, end = self.turn_window
        if start > end:
            raise InputError(f"turn window reversed: {self.turn_window}")
        if self.words is None:
            return
        prev = None
        for token, w_start, w_end in self.words:
            if w_start > w_end:
                raise InputError(f"word interval reversed for {token!r}")
            if w_start < start or w_end > end:
                raise InputError(f"word {token!r} outside turn window")
            if prev is not None and w_start < prev:
                raise InputError("word intervals must be sorted by start")
            prev = w_start
        if _squash("".join(t for t, _, _ in self.words)) != _squash(self.text):
            raise InputError("word tokens do not concatenate to the utterance text")


@dataclass(frozen=True)
class SemanticScanpath:
    utterance: Utterance
    gaze_history: GazeHistory

    def __post_init__(self):
        if self.utterance.turn_window != (
            self.gaze_history.window_start_ms,
            self.gaze_history.window_end_ms,
        ):
            raise InputError("gaze history window must equal the utterance turn window")


def compose(utterance: Utterance, history: GazeHistory) -> SemanticScanpath:
    """Pair an utterance with its gaze history.

    If the windows differ but overlap, the history is re-windowed to the
    utterance turn, keeping segments that start inside it.  Disjoint
    windows are an error.
    """
    u_start, u_end = utterance.turn_window
    if (history.window_start_ms, history.window_end_ms) != (u_start, u_end):
        if history.window_end_ms < u_start or history.window_start_ms > u_end:
            raise InputError(
                f"utterance window {utterance.turn_window} disjoint from gaze "
                f"history window [{history.window_start_ms}, {history.window_end_ms}]"
            )
        kept = tuple(s for s in history.segments if u_start <= s.start_ms <= u_end)
        history = GazeHistory(window_start_ms=u_start, window_end_ms=u_end, segments=kept)
    return SemanticScanpath(utterance=utterance, gaze_history=history)


def format_duration_s(duration_ms: float) -> str:
    """Milliseconds to seconds, two decimals, round-half-up, no locale."""
    seconds = Decimal(repr(float(duration_ms))) / Decimal(1000)
    return str(seconds.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] in _UNESCAPES:
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def render_prompt_text(sp: SemanticScanpath) -> str:
    """Canonical two-part prompt block; deterministic."""
    lines = [f'Speech input: "{_escape(sp.utterance.text)}"']
    if not sp.gaze_history.segments:
        lines.append("Gaze history: (none)")
    else:
        lines.append("Gaze history:")
        for i, seg in enumerate(sp.gaze_history.segments, start=1):
            ids = ", ".join(seg.object_ids)
            lines.append(f"{i}. [{ids}] {format_duration_s(seg.duration_ms)}s")
    return "\n".join(lines)


_SPEECH_RE = re.compile(r'^Speech input: "(?P<text>(?:[^"\\]|\\.)*)"\s*$')
_SEGMENT_RE = re.compile(
    r"^(?P<num>\d+)\. \[(?P<ids>[^\]]*)\] (?P<secs>\d+\.\d{2})s\s*$"
)


def parse_prompt_text(text: str) -> SemanticScanpath:
    """Parse a canonical prompt block back into a scanpath.

    Timing is canonicalized: segments are laid end-to-end from 0 and the
    window spans their total; word timestamps are not representable.
    """
    # split strictly on \n (the renderer's join character); other unicode
    # line separators may legitimately appear inside the quoted utterance
    lines = text.rstrip("\n").split("\n")
    if not lines or lines == [""]:
        raise ParseError("empty prompt block", line=1)
    m = _SPEECH_RE.match(lines[0])
    if not m:
        raise ParseError('expected `Speech input: "..."`', line=1)
    utterance_text = _unescape(m.group("text"))

    if len(lines) < 2:
        raise ParseError("missing `Gaze history:` line", line=2)
    header = lines[1].rstrip()
    if header == "Gaze history: (none)":
        seg_lines: list[str] = []
    elif header == "Gaze history:":
        seg_lines = lines[2:]
    else:
        raise ParseError("expected `Gaze history:` or `Gaze history: (none)`", line=2)

    segments: list[FixationSegment] = []
    cursor_ms = 0.0
    for offset, raw in enumerate(seg_lines):
        lineno = offset + 3
        if not raw.strip():
            if any(rest.strip() for rest in seg_lines[offset:]):
                raise ParseError("blank line inside gaze history", line=lineno)
            break
        m = _SEGMENT_RE.match(raw)
        if not m:
            raise ParseError(
                "expected `N. [id1, id2] D.DDs`", line=lineno, column=1
            )
        num = int(m.group("num"))
        if num != len(segments) + 1:
            raise ParseError(
                f"segment numbered {num}, expected {len(segments) + 1}", line=lineno
            )
        ids = tuple(i.strip() for i in m.group("ids").split(",") if i.strip())
        if not ids:
            raise ParseError("segment lists no object ids", line=lineno, column=raw.index("[") + 1)
        duration_ms = float(Decimal(m.group("secs")) * 1000)
        segments.append(
            FixationSegment(object_ids=ids, start_ms=cursor_ms, duration_ms=duration_ms)
        )
        cursor_ms += duration_ms

    history = GazeHistory(window_start_ms=0.0, window_end_ms=cursor_ms, segments=tuple(segments))
    utterance = Utterance(text=utterance_text, turn_window=(0.0, cursor_ms))
    return SemanticScanpath(utterance=utterance, gaze_history=history)


def prompt_equivalent(a: SemanticScanpath, b: SemanticScanpath) -> bool:
    """Equality on the prompt-visible projection: utterance text, ordered
    id lists, and centisecond-rounded durations."""
    if a.utterance.text != b.utterance.text:
        return False
    if len(a.gaze_history.segments) != len(b.gaze_history.segments):
        return False
    for sa, sb in zip(a.gaze_history.segments, b.gaze_history.segments):
        if sa.object_ids != sb.object_ids:
            return False
        if format_duration_s(sa.duration_ms) != format_duration_s(sb.duration_ms):
            return False
    return True
