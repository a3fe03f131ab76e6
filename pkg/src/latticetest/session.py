"""Live adaptive test delivery.

A session walks one student through the lattice: items for the current
node are instantiated from the bank at the column's difficulty level,
answers are checked numerically, and the node outcome decides the
transition. Every state change is appended to a durable event log before
it is acknowledged, so sessions survive a crash up to the in-flight
request.
"""
from __future__ import annotations

import json
import logging
import random
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from latticetest.items import ItemInstance, ItemTemplate, check_answer, instantiate, parse_template
from latticetest.model import (
    LatticeConfig,
    PathState,
    advance,
    grade,
    is_terminal,
    level_of_column,
    node_outcome,
)

logger = logging.getLogger(__name__)


class SessionError(ValueError):
    """Invalid request against a session or bank."""


class UnknownSessionError(SessionError):
    pass


class LogCorruptionError(RuntimeError):
    """A non-trailing event log record failed to parse or replay."""


# ---------------------------------------------------------------------------
# Item bank
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ItemBank:
    """Per-level pools of item templates plus the seed all draws derive from."""

    seed: int
    templates: tuple[ItemTemplate, ...]

    def __post_init__(self) -> None:
        ids = [t.id for t in self.templates]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise SessionError(f"duplicate template ids in bank: {dupes}")

    def levels(self) -> set[int]:
        return {t.level for t in self.templates}

    def at_level(self, level: int) -> list[ItemTemplate]:
        return sorted((t for t in self.templates if t.level == level), key=lambda t: t.id)

    def missing_levels(self, config: LatticeConfig) -> list[int]:
        return [lvl for lvl in range(1, config.n_levels + 1) if not self.at_level(lvl)]

    def to_dict(self) -> dict:
        return {"seed": self.seed, "templates": [t.to_dict() for t in self.templates]}

    @classmethod
    def from_dict(cls, doc: dict) -> ItemBank:
        if not isinstance(doc, dict) or "templates" not in doc:
            raise SessionError("bank document needs a 'templates' list")
        seed = doc.get("seed", 0)
        if not isinstance(seed, int):
            raise SessionError("bank seed must be an integer")
        templates = tuple(parse_template(t) for t in doc["templates"])
        return cls(seed=seed, templates=templates)

    @classmethod
    def from_json(cls, text: str) -> ItemBank:
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_path(cls, path: str | Path) -> ItemBank:
        return cls.from_json(Path(path).read_text())


# ---------------------------------------------------------------------------
# Session state
# ---------------------------------------------------------------------------

@dataclass
class PendingItem:
    instance: ItemInstance
    submitted: float | str | None = None
    correct: bool | None = None

    @property
    def answered(self) -> bool:
        return self.submitted is not None


@dataclass(frozen=True)
class HistoryEntry:
    row: int
    col: int
    level: int
    item_id: str
    submitted: float | str
    correct: bool

    def to_dict(self) -> dict:
        return {
            "row": self.row,
            "col": self.col,
            "level": self.level,
            "item_id": self.item_id,
            "submitted": self.submitted,
            "correct": self.correct,
        }


@dataclass
class Session:
    session_id: str
    student_key: str
    config: LatticeConfig
    state: PathState = field(default_factory=PathState)
    pending: list[PendingItem] = field(default_factory=list)
    history: list[HistoryEntry] = field(default_factory=list)
    used_template_ids: set[str] = field(default_factory=set)
    final_grade: float | None = None
    next_seq: int = 1

    @property
    def finished(self) -> bool:
        return self.final_grade is not None

    @property
    def answered_count(self) -> int:
        in_node = sum(1 for p in self.pending if p.answered)
        return self.state.row * self.config.items_per_node + in_node

    @property
    def total_items(self) -> int:
        return self.config.total_items


@dataclass(frozen=True)
class CurrentItem:
    prompt: str
    answered: int
    total: int


@dataclass(frozen=True)
class SubmitOutcome:
    finished: bool
    answered: int
    total: int
    grade: float | None = None


@dataclass(frozen=True)
class SessionResult:
    grade: float
    final_column: int
    transcript: tuple[HistoryEntry, ...]


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------

class SessionStore:
    """Sessions for one test (a config paired with a bank), with durability.

    Distinct sessions may be driven from multiple threads; operations on a
    single session are serialized by a per-session lock. If ``log_path`` is
    given, each event is flushed to disk before the call returns, and an
    existing log is replayed on startup.
    """

    def __init__(
        self,
        config: LatticeConfig,
        bank: ItemBank,
        log_path: str | Path | None = None,
    ):
        missing = bank.missing_levels(config)
        if missing:
            raise SessionError(f"bank has no templates for levels: {missing}")
        self.config = config
        self.bank = bank
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._log_lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None
        if self._log_path is not None and self._log_path.exists():
            self.recover(self._log_path)

    # -- internals ----------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            try:
                return self._locks[session_id]
            except KeyError:
                raise UnknownSessionError(f"unknown session {session_id!r}") from None

    def _get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session_id!r}") from None

    def _append_event(self, record: dict) -> None:
        if self._log_path is None:
            return
        line = json.dumps(record, sort_keys=True)
        with self._log_lock:
            with open(self._log_path, "a") as f:
                f.write(line + "\n")
                f.flush()

    def _select_templates(self, session: Session, row: int, level: int) -> list[ItemTemplate]:
        """Deterministic per-node template draw.

        Keyed by (bank seed, student, node row); avoids templates already
        served in this session while the level's pool allows it.
        """
        pool = self.bank.at_level(level)
        rng = random.Random(f"select:{self.bank.seed}:{session.student_key}:{row}")
        chosen: list[ItemTemplate] = []
        for _ in range(self.config.items_per_node):
            in_node = {t.id for t in chosen}
            fresh = [t for t in pool if t.id not in session.used_template_ids and t.id not in in_node]
            unrepeated = [t for t in pool if t.id not in in_node]
            candidates = fresh or unrepeated or pool
            chosen.append(rng.choice(candidates))
        session.used_template_ids.update(t.id for t in chosen)
        return chosen

    def _deal_node(self, session: Session) -> None:
        row, col = session.state.row, session.state.col
        level = level_of_column(self.config, col)
        templates = self._select_templates(session, row, level)
        node_seed = f"{self.bank.seed}:row{row}"
        session.pending = [
            PendingItem(instance=instantiate(t, session.student_key, node_seed))
            for t in templates
        ]

    def _apply_create(self, session_id: str, student_key: str) -> Session:
        session = Session(session_id=session_id, student_key=student_key, config=self.config)
        self._deal_node(session)
        self.sessions[session_id] = session
        with self._registry_lock:
            self._locks[session_id] = threading.Lock()
        return session

    def _apply_answer(self, session: Session, submitted: float | str) -> SubmitOutcome:
        pending = next(p for p in session.pending if not p.answered)
        correct = check_answer(pending.instance, submitted)
        pending.submitted = submitted
        pending.correct = correct
        session.history.append(
            HistoryEntry(
                row=session.state.row,
                col=session.state.col,
                level=pending.instance.level,
                item_id=pending.instance.template_id,
                submitted=submitted,
                correct=correct,
            )
        )
        if all(p.answered for p in session.pending):
            outcome = node_outcome(self.config, [bool(p.correct) for p in session.pending])
            session.state = advance(self.config, session.state, outcome)
            if is_terminal(self.config, session.state):
                session.final_grade = grade(self.config, session.state.col)
                session.pending = []
            else:
                self._deal_node(session)
        return SubmitOutcome(
            finished=session.finished,
            answered=session.answered_count,
            total=session.total_items,
            grade=session.final_grade,
        )

    # -- public API ---------------------------------------------------------

    def create_session(self, student_key: str, session_id: str | None = None) -> Session:
        """Open a session at the lattice origin with the first node dealt."""
        if not student_key:
            raise SessionError("student_key must be non-empty")
        session_id = session_id or uuid.uuid4().hex
        if session_id in self.sessions:
            raise SessionError(f"session {session_id!r} already exists")
        self._append_event(
            {
                "type": "created",
                "session": session_id,
                "seq": 0,
                "student_key": student_key,
                "config": self.config.to_dict(),
            }
        )
        return self._apply_create(session_id, student_key)

    def current_item(self, session_id: str) -> CurrentItem:
        """The next unanswered item; repeated calls return the same item.

        The payload deliberately excludes the item's level and the current
        column, so a student cannot infer their position on the path.
        """
        with self._lock_for(session_id):
            session = self._get(session_id)
            if session.finished:
                raise SessionError("session is finished; fetch the result instead")
            pending = next(p for p in session.pending if not p.answered)
            return CurrentItem(
                prompt=pending.instance.rendered_prompt,
                answered=session.answered_count,
                total=session.total_items,
            )

    def submit_answer(self, session_id: str, submitted: float | str) -> SubmitOutcome:
        """Check and record one answer, advancing the path on node completion."""
        if submitted is None or (isinstance(submitted, str) and not submitted.strip()):
            raise SessionError("empty submissions are not accepted")
        if isinstance(submitted, bool) or not isinstance(submitted, (int, float, str)):
            raise SessionError(f"submission must be a number, got {type(submitted).__name__}")
        with self._lock_for(session_id):
            session = self._get(session_id)
            if session.finished:
                raise SessionError("session is already finished")
            self._append_event(
                {
                    "type": "answer",
                    "session": session_id,
                    "seq": session.next_seq,
                    "value": submitted,
                }
            )
            session.next_seq += 1
            return self._apply_answer(session, submitted)

    def result(self, session_id: str) -> SessionResult:
        with self._lock_for(session_id):
            session = self._get(session_id)
            if not session.finished:
                raise SessionError("session is still in progress")
            assert session.final_grade is not None
            return SessionResult(
                grade=session.final_grade,
                final_column=session.state.col,
                transcript=tuple(session.history),
            )

    # -- recovery -----------------------------------------------------------

    def recover(self, log_path: str | Path) -> dict[str, Session]:
        """Rebuild sessions by replaying an event log.

        An unreadable or unreplayable final record is dropped with a
        warning (it was the in-flight request); any earlier failure raises
        ``LogCorruptionError``. The file is truncated back to the valid
        prefix so later appends continue from a clean state.
        """
        path = Path(log_path)
        raw = path.read_bytes()
        records: list[tuple[dict, int]] = []  # (record, end offset)
        offset = 0
        bad_tail = False
        for line in raw.splitlines(keepends=True):
            end = offset + len(line)
            try:
                record = json.loads(line)
                if not isinstance(record, dict):
                    raise ValueError("record is not an object")
            except ValueError:
                if end == len(raw):
                    logger.warning("dropping truncated trailing log record in %s", path)
                    bad_tail = True
                    break
                raise LogCorruptionError(
                    f"unreadable record before end of log at byte {offset}"
                ) from None
            records.append((record, end))
            offset = end

        for i, (record, end) in enumerate(records):
            is_last = i == len(records) - 1
            try:
                self._replay_record(record)
            except (SessionError, KeyError, TypeError, StopIteration) as exc:
                if is_last:
                    logger.warning("dropping unreplayable trailing log record: %s", exc)
                    bad_tail = True
                    offset = records[i - 1][1] if i else 0
                    break
                raise LogCorruptionError(f"record {i} failed to replay: {exc}") from exc

        if bad_tail and self._log_path is not None and Path(self._log_path) == path:
            with self._log_lock, open(path, "r+b") as f:
                f.truncate(offset)
        return dict(self.sessions)

    def _replay_record(self, record: dict) -> None:
        kind = record["type"]
        session_id = record["session"]
        if kind == "created":
            if record["seq"] != 0:
                raise SessionError("creation record must have seq 0")
            if record["config"] != self.config.to_dict():
                raise SessionError("log was written against a different test config")
            if session_id in self.sessions:
                raise SessionError(f"duplicate creation of session {session_id!r}")
            self._apply_create(session_id, record["student_key"])
        elif kind == "answer":
            session = self._get(session_id)
            if record["seq"] != session.next_seq:
                raise SessionError(
                    f"out-of-order event for session {session_id!r}: "
                    f"expected seq {session.next_seq}, got {record['seq']}"
                )
            if session.finished:
                raise SessionError("answer recorded after session finished")
            session.next_seq += 1
            self._apply_answer(session, record["value"])
        else:
            raise SessionError(f"unknown event type {kind!r}")
