"""HTTP service wrapping the scenario engine.

Endpoints accept scenario text and return the deterministic report, per-task
outcomes, and (optionally) CSV plot data.  Bundled scenarios ship with the
package and can be listed and fetched.  Timing is reported in the response
body only; the report text stays byte-identical across runs.
"""

from __future__ import annotations

import time
from fractions import Fraction
from importlib import resources

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .report import csv_files
from .scenario import RunResult, ScenarioError, parse_scenario, run_scenario

__all__ = ["app", "bundled_scenario_names", "bundled_scenario_text", "run_scenario_text"]


def bundled_scenario_names() -> list[str]:
    root = resources.files("varlot") / "scenarios"
    return sorted(p.name[: -len(".scn")] for p in root.iterdir() if p.name.endswith(".scn"))


def bundled_scenario_text(name: str) -> str:
    path = resources.files("varlot") / "scenarios" / f"{name}.scn"
    if not path.is_file():
        raise FileNotFoundError(name)
    return path.read_text(encoding="utf-8")


def bundled_golden_report(name: str) -> str | None:
    path = resources.files("varlot") / "scenarios" / f"{name}.golden.txt"
    if not path.is_file():
        return None
    return path.read_text(encoding="utf-8")


class TaskModel(BaseModel):
    index: int
    title: str
    kind: str
    primary: str
    lines: list[str]
    ok: bool


class RunRequest(BaseModel):
    scenario: str = Field(description="scenario file text")
    name: str = "scenario"
    epsilon: str | None = Field(default=None, description="override, written p/q")
    include_csv: bool = False


class RunResponse(BaseModel):
    exit_code: int
    report: str
    tasks: list[TaskModel]
    csv: dict[str, str] = {}
    elapsed_ms: float


class ValidateRequest(BaseModel):
    scenario: str
    name: str = "scenario"


class ValidateResponse(BaseModel):
    valid: bool
    tasks: int = 0
    error: str | None = None
    line: int | None = None


class ScenarioInfo(BaseModel):
    name: str
    first_line: str


def run_scenario_text(
    text: str, name: str = "scenario", epsilon: str | None = None, include_csv: bool = False
) -> RunResponse:
    start = time.perf_counter()
    try:
        sc = parse_scenario(text, name)
        if epsilon is not None:
            sc.epsilon = Fraction(epsilon)
        result: RunResult = run_scenario(sc)
    except ScenarioError as exc:
        elapsed = (time.perf_counter() - start) * 1000
        return RunResponse(
            exit_code=2,
            report=f"parse/usage error: {exc}\n",
            tasks=[],
            csv={},
            elapsed_ms=elapsed,
        )
    csv = csv_files(sc, result) if include_csv else {}
    elapsed = (time.perf_counter() - start) * 1000
    return RunResponse(
        exit_code=result.exit_code,
        report=result.report,
        tasks=[
            TaskModel(
                index=o.index,
                title=o.title,
                kind=o.kind,
                primary=o.primary,
                lines=list(o.lines),
                ok=o.ok,
            )
            for o in result.outcomes
        ],
        csv=csv,
        elapsed_ms=elapsed,
    )


app = FastAPI(
    title="varlot",
    description="Truth values, axiom checks, and expected-utility representations "
    "for variable lotteries.",
)


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.get("/scenarios", response_model=list[ScenarioInfo])
def list_scenarios() -> list[ScenarioInfo]:
    out = []
    for name in bundled_scenario_names():
        text = bundled_scenario_text(name)
        first = next((ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")), "")
        out.append(ScenarioInfo(name=name, first_line=first))
    return out


@app.get("/scenarios/{name}")
def get_scenario(name: str) -> dict:
    try:
        return {"name": name, "scenario": bundled_scenario_text(name)}
    except FileNotFoundError:
        raise HTTPException(status_code=404, detail=f"no bundled scenario {name!r}")


@app.post("/run", response_model=RunResponse)
def run(request: RunRequest) -> RunResponse:
    return run_scenario_text(
        request.scenario, request.name, request.epsilon, request.include_csv
    )


@app.post("/validate", response_model=ValidateResponse)
def validate(request: ValidateRequest) -> ValidateResponse:
    try:
        sc = parse_scenario(request.scenario, request.name)
    except ScenarioError as exc:
        return ValidateResponse(valid=False, error=str(exc), line=exc.line)
    return ValidateResponse(valid=True, tasks=len(sc.tasks))
