"""HTTP surface: POST /score and GET /health.

Request/response bodies follow the chainbeam remote-scorer wire protocol:
``{"items": [{"head": 1|2, "question": str, "chain": [{"title", "text"}],
"candidate": {"title", "text"}}]}`` answered by ``{"scores": [...]}`` with
one float per item. Schema violations answer 400; a head inconsistent with
the chain (head 1 with a non-empty chain, head 2 with an empty one) or an
untokenizable candidate answers 422. Handlers are pure per-request, so
concurrent batches never interact.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .scoring import containment_score

app = FastAPI(title="chainbeam scorer service", version="0.1.0")


class PassageText(BaseModel):
    title: str = ""
    text: str = ""


class ScoreItem(BaseModel):
    head: Literal[1, 2]
    question: str
    chain: list[PassageText] = []
    candidate: PassageText


class ScoreRequestBody(BaseModel):
    items: list[ScoreItem]


class ScoreResponseBody(BaseModel):
    scores: list[float]


@app.exception_handler(RequestValidationError)
async def on_schema_violation(request, exc: RequestValidationError) -> JSONResponse:
    detail = [
        {"loc": list(err.get("loc", ())), "msg": err.get("msg", ""), "type": err.get("type", "")}
        for err in exc.errors()
    ]
    return JSONResponse(status_code=400, content={"error": "invalid request body", "detail": detail})


@app.post("/score", response_model=ScoreResponseBody)
def handle_score(body: ScoreRequestBody) -> ScoreResponseBody:
    scores: list[float] = []
    for index, item in enumerate(body.items):
        if (item.head == 1) != (len(item.chain) == 0):
            raise HTTPException(
                status_code=422,
                detail=f"item {index}: head {item.head} inconsistent with chain length {len(item.chain)}",
            )
        try:
            score = containment_score(
                item.question,
                [(p.title, p.text) for p in item.chain],
                (item.candidate.title, item.candidate.text),
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=f"item {index}: {exc}") from exc
        scores.append(score)
    return ScoreResponseBody(scores=scores)


@app.api_route("/health", methods=["GET", "HEAD"])
def handle_health() -> dict:
    return {"status": "ok"}
