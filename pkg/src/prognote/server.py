"""Read-only HTTP JSON service feeding the curve-viewer client.

All artifacts are loaded into memory before the listener starts; handlers
only read immutable state, so concurrent requests are safe and repeated GETs
return identical bodies.
"""
from __future__ import annotations

import datetime as dt

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .pipeline import ServiceState


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="prognote", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET"],
        allow_headers=["*"],
    )

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.get("/api/patients")
    def list_patients():
        return [
            {
                "patient_id": pid,
                "n_visits": len(timeline.groups),
                "outcome_kind": timeline.outcome.kind,
            }
            for pid, timeline in sorted(state.timelines.items())
        ]

    @app.get("/api/patients/{patient_id}/curve")
    def patient_curve(patient_id: str):
        curve = state.curves.get(patient_id)
        if curve is None:
            return error(404, f"unknown patient {patient_id!r}")
        return curve

    @app.get("/api/patients/{patient_id}/visits/{date}/summary")
    def patient_visit_summary(patient_id: str, date: str):
        if patient_id not in state.timelines:
            return error(404, f"unknown patient {patient_id!r}")
        try:
            dt.date.fromisoformat(date)
        except ValueError:
            return error(400, f"malformed date {date!r}, expected YYYY-MM-DD")
        summary = state.summary_for(patient_id, date)
        if summary is None:
            return error(404, f"patient {patient_id!r} has no visit on {date}")
        return summary

    @app.get("/api/meta")
    def meta():
        return state.meta

    return app
