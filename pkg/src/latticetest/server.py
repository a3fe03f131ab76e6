"""HTTP wire protocol over the session store.

JSON request/response endpoints, one registry entry per hosted test:

    GET  /health                           liveness + hosted test ids
    GET  /tests                            test geometries for clients
    POST /tests/{test_id}/sessions         {"student_key"} -> session id
    GET  /sessions/{sid}/item              current prompt + progress
    POST /sessions/{sid}/answers           {"answer": number} -> progress/grade
    GET  /sessions/{sid}/result            final grade + transcript

Per-item correctness and the item level are never part of in-test
payloads; the transcript exposes them only after the session finished.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from latticetest.session import SessionError, SessionStore, UnknownSessionError


class CreateSessionRequest(BaseModel):
    student_key: str = Field(min_length=1)


class AnswerRequest(BaseModel):
    answer: float


def create_app(tests: dict[str, SessionStore]) -> FastAPI:
    """Build the service around one store per hosted test id."""
    if not tests:
        raise ValueError("need at least one test to serve")
    app = FastAPI(title="latticetest session service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def store_for(session_id: str) -> SessionStore:
        # stores are the source of truth, so recovered sessions resolve too
        for store in tests.values():
            if session_id in store.sessions:
                return store
        raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "tests": sorted(tests)}

    @app.get("/tests")
    def list_tests() -> dict:
        return {
            "tests": [
                {
                    "test_id": test_id,
                    "total_items": store.config.total_items,
                    "kind": store.config.kind.value,
                }
                for test_id, store in sorted(tests.items())
            ]
        }

    @app.post("/tests/{test_id}/sessions")
    def create_session(test_id: str, body: CreateSessionRequest) -> dict:
        store = tests.get(test_id)
        if store is None:
            raise HTTPException(status_code=404, detail=f"unknown test {test_id!r}")
        try:
            session = store.create_session(body.student_key)
        except SessionError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "session_id": session.session_id,
            "answered": 0,
            "total": session.total_items,
        }

    @app.get("/sessions/{session_id}/item")
    def current_item(session_id: str) -> dict:
        store = store_for(session_id)
        try:
            item = store.current_item(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {
            "prompt": item.prompt,
            "answered": item.answered,
            "total": item.total,
            "finished": False,
        }

    @app.post("/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: AnswerRequest) -> dict:
        store = store_for(session_id)
        try:
            outcome = store.submit_answer(session_id, body.answer)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        payload = {
            "accepted": True,
            "finished": outcome.finished,
            "answered": outcome.answered,
            "total": outcome.total,
        }
        if outcome.finished:
            payload["grade"] = outcome.grade
        return payload

    @app.get("/sessions/{session_id}/result")
    def result(session_id: str) -> dict:
        store = store_for(session_id)
        try:
            res = store.result(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {
            "grade": res.grade,
            "final_column": res.final_column,
            "transcript": [entry.to_dict() for entry in res.transcript],
        }

    return app
