"""HTTP facade for debugging sessions.

Sessions live in memory, keyed by opaque ids.  Per-session transitions are
serialized with a non-blocking lock: a concurrent submission loses and gets
409, matching the stale-action semantics of the session layer.  GET
endpoints never mutate; the next action is computed eagerly after every
transition so reads stay pure.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
import uuid
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import checker, interp, parser, session
from .errors import (DepdiagError, InvalidAnswer, NotComposite, ParseError,
                     CheckError, RuntimeFault, SessionFinished, StaleAction)


@dataclass
class Config:
    max_card: int = 2
    step_budget: int = interp.DEFAULT_STEP_BUDGET
    allow_origin: str = None
    persist_dir: str = None


class Handle:
    def __init__(self, state, source):
        self.id = uuid.uuid4().hex
        self.created_at = time.time()
        self.program_hash = hashlib.sha256(source.encode()).hexdigest()
        self.state = state
        self.lock = threading.Lock()


def _advance(state):
    if state.status == "running" and state.pending is None:
        session.next_action(state)


def view_model(handle):
    state = handle.state
    prog = state.program.program if hasattr(state.program, "program") \
        else state.program
    candidates = session.candidate_view(state)
    highlight = sorted({ln for c in candidates for ln in c["lines"]})
    return {
        "id": handle.id,
        "created_at": handle.created_at,
        "program_hash": handle.program_hash,
        "status": state.status,
        "source": prog.source_text,
        "source_lines": prog.source_text.splitlines(),
        "candidates": candidates,
        "highlight_lines": highlight,
        "action": None if state.pending is None else state.pending.to_json(),
        "counters": session.interaction_report(state),
        "history": state.history,
        "localized": state.localized or None,
    }


def create_app(config=None):
    config = config or Config()
    app = FastAPI(title="depdiag")
    sessions = {}

    if config.allow_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[config.allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def persist(handle):
        if not config.persist_dir:
            return
        os.makedirs(config.persist_dir, exist_ok=True)
        path = os.path.join(config.persist_dir, f"{handle.id}.json")
        with open(path, "w") as fh:
            json.dump({"id": handle.id,
                       "created_at": handle.created_at,
                       "session": session.to_json(handle.state)}, fh, indent=2)

    def not_found():
        return JSONResponse({"error": "unknown session"}, status_code=404)

    async def body_json(request):
        try:
            data = await request.json()
        except Exception:
            return None
        return data if isinstance(data, dict) else None

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(sessions)}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        data = await body_json(request)
        if data is None or "program" not in data or "test" not in data:
            return JSONResponse({"error": "body must contain program and test"},
                                status_code=400)
        try:
            program = checker.check(
                parser.parse(data["program"], data.get("name", "program.mjv")))
            test = interp.TestCase.from_json(data["test"])
            if program.program.method(test.method) is None:
                raise CheckError(f"no method {test.method}")
            state = session.start_session(
                program, test,
                max_card=int(data.get("max_card", config.max_card)),
                budget=config.step_budget)
        except (ParseError, CheckError, RuntimeFault, InvalidAnswer,
                KeyError, TypeError) as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        _advance(state)
        handle = Handle(state, data["program"])
        sessions[handle.id] = handle
        persist(handle)
        return view_model(handle)

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        handle = sessions.get(sid)
        if handle is None:
            return not_found()
        return view_model(handle)

    @app.delete("/sessions/{sid}", status_code=204)
    def delete_session(sid: str):
        if sessions.pop(sid, None) is None:
            return not_found()
        return Response(status_code=204)

    @app.post("/sessions/{sid}/answer")
    async def answer(sid: str, request: Request):
        handle = sessions.get(sid)
        if handle is None:
            return not_found()
        data = await body_json(request)
        if data is None or "action_id" not in data:
            return JSONResponse({"error": "body must contain action_id"},
                                status_code=400)
        verdict = data.get("verdict", data.get("answer"))
        if not handle.lock.acquire(blocking=False):
            return JSONResponse({"error": "a transition is in progress"},
                                status_code=409)
        try:
            session.submit_answer(handle.state, data["action_id"], verdict)
            _advance(handle.state)
        except (StaleAction, SessionFinished) as e:
            return JSONResponse({"error": str(e)}, status_code=409)
        except InvalidAnswer as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        finally:
            handle.lock.release()
        persist(handle)
        return view_model(handle)

    @app.post("/sessions/{sid}/expand")
    async def expand(sid: str, request: Request):
        handle = sessions.get(sid)
        if handle is None:
            return not_found()
        data = await body_json(request)
        if data is None or "component" not in data:
            return JSONResponse({"error": "body must contain component"},
                                status_code=400)
        if not handle.lock.acquire(blocking=False):
            return JSONResponse({"error": "a transition is in progress"},
                                status_code=409)
        try:
            session.expand(handle.state, data["component"])
            _advance(handle.state)
        except NotComposite as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        except SessionFinished as e:
            return JSONResponse({"error": str(e)}, status_code=409)
        finally:
            handle.lock.release()
        persist(handle)
        return view_model(handle)

    @app.get("/sessions/{sid}/report")
    def report(sid: str):
        handle = sessions.get(sid)
        if handle is None:
            return not_found()
        return session.interaction_report(handle.state)

    @app.exception_handler(DepdiagError)
    def domain_error(request, exc):
        return JSONResponse({"error": str(exc)}, status_code=400)

    return app
