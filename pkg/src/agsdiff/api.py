"""Local HTTP API for browsing reports and applying review decisions.

Two modes share one endpoint surface:

* suite mode (directory): reports are recomputed live from the stored
  golden masters and the last captured actual states, so accepting or
  ignoring a change shrinks the pending groups on the next request;
* report mode (single ``.report.json`` file): read-only browsing.

Decisions mutate the suite only through ``POST /api/decision``, which
holds the suite writer lock for the duration of the request.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import HTMLResponse, JSONResponse

from . import ags
from .errors import AgsDiffError, SuiteLocked
from .executor import DiffReport, execute, load_report, report_to_json
from .filters import FilterRuleSet, apply_state_filter
from .identification import extract
from .maintenance import (
    Action,
    ChangeSignature,
    Scope,
    apply_decision,
    group_changes,
    make_decision,
    signature_from_json,
    signature_to_json,
)
from .store import Suite

_PLACEHOLDER_PAGE = """<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>agsdiff review</title></head>
<body>
<h1>agsdiff review API</h1>
<p>No review UI bundle is installed. The JSON API is live:</p>
<ul>
<li><code>GET /api/report</code></li>
<li><code>GET /api/groups</code></li>
<li><code>GET /api/element/{handle}</code></li>
<li><code>POST /api/decision</code></li>
</ul>
</body>
</html>
"""


class ReportSource:
    """Read-only source backed by a single report file."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.suite: Suite | None = None

    def reports(self) -> list[DiffReport]:
        return [load_report(self.path)]

    def strong_keys(self):
        from .identification import DEFAULT_STRONG_KEYS

        return DEFAULT_STRONG_KEYS


class SuiteSource:
    """Live source backed by a suite directory.

    Reports are recomputed from golden master + stored actual with the
    current rules and configuration, so decisions take effect without a
    new capture run.
    """

    def __init__(self, root: Path):
        self.suite = Suite(root, create=False)

    def reports(self) -> list[DiffReport]:
        suite = self.suite
        config = suite.config()
        rules = suite.rules()
        out = []
        for test_id, step_name in suite.list_steps():
            if not suite.actual_path(test_id, step_name).exists():
                continue
            expected = suite.read_golden_master(test_id, step_name)
            actual = suite.read_actual(test_id, step_name)
            out.append(
                execute(
                    expected,
                    actual,
                    rules=rules,
                    strategy=config.strategy,
                    config=config.keys,
                    test_id=test_id,
                    step_name=step_name,
                )
            )
        return out

    def strong_keys(self):
        return self.suite.config().keys.strong_keys


def _grouped(source) -> dict[ChangeSignature, list]:
    return group_changes(source.reports(), strong_keys=source.strong_keys())


def _groups_payload(groups: Mapping[ChangeSignature, list]) -> dict:
    rows = []
    for index, (signature, occurrences) in enumerate(groups.items()):
        rows.append(
            {
                "index": index,
                "signature": signature_to_json(signature),
                "count": len(occurrences),
                "occurrences": [
                    {
                        "test_id": o.test_id,
                        "step_name": o.step_name,
                        "handle": o.handle,
                        "actual_handle": o.actual_handle,
                    }
                    for o in occurrences
                ],
            }
        )
    return {"groups": rows, "pending": len(rows)}


def _element_attributes(
    state: ags.GuiState, handle: str, rules: FilterRuleSet
) -> dict[str, str] | None:
    """Attributes of the element as the comparison saw it.

    Handles are assigned on the filtered view, so the state is filtered
    with the current rules before the lookup.
    """
    for element in extract(apply_state_filter(state, rules)):
        if element.origin_path == handle:
            return dict(element.attributes)
    return None


def _summary_lookup(reports: Iterable[DiffReport], handle: str) -> dict | None:
    for report in reports:
        for summary in (*report.deleted, *report.created):
            if summary.handle == handle:
                return {
                    "handle": handle,
                    "test_id": report.test_id,
                    "step_name": report.step_name,
                    "golden_master": dict(summary.attributes),
                    "actual": None,
                }
        for pair in report.attribute_diffs:
            if pair.handle == handle or pair.actual_handle == handle:
                return {
                    "handle": handle,
                    "test_id": report.test_id,
                    "step_name": report.step_name,
                    "golden_master": dict(pair.element.attributes),
                    "actual": None,
                }
    return None


def create_app(source_path: Path, ui_dir: Path | None = None) -> FastAPI:
    source_path = Path(source_path)
    if source_path.is_dir():
        source: SuiteSource | ReportSource = SuiteSource(source_path)
    else:
        source = ReportSource(source_path)

    app = FastAPI(title="agsdiff review API", docs_url=None, redoc_url=None)

    @app.exception_handler(AgsDiffError)
    async def _domain_error(request: Request, exc: AgsDiffError):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/api/report")
    def api_report():
        reports = source.reports()
        if isinstance(source, ReportSource):
            return report_to_json(reports[0])
        return {"reports": [report_to_json(r) for r in reports]}

    @app.get("/api/groups")
    def api_groups():
        return _groups_payload(_grouped(source))

    @app.get("/api/element/{handle:path}")
    def api_element(handle: str, test: str | None = None, step: str | None = None):
        suite = source.suite
        if suite is None:
            found = _summary_lookup(source.reports(), handle)
            if found is None:
                raise HTTPException(status_code=404, detail=f"no element {handle!r}")
            return found
        rules = suite.rules()
        for test_id, step_name in suite.list_steps():
            if test is not None and test_id != test:
                continue
            if step is not None and step_name != step:
                continue
            recorded = _element_attributes(
                suite.read_golden_master(test_id, step_name), handle, rules
            )
            actual = None
            if suite.actual_path(test_id, step_name).exists():
                actual = _element_attributes(
                    suite.read_actual(test_id, step_name), handle, rules
                )
            if recorded is not None or actual is not None:
                return {
                    "handle": handle,
                    "test_id": test_id,
                    "step_name": step_name,
                    "golden_master": recorded,
                    "actual": actual,
                }
        raise HTTPException(status_code=404, detail=f"no element {handle!r}")

    @app.post("/api/decision")
    async def api_decision(request: Request):
        suite = source.suite
        if suite is None:
            raise HTTPException(status_code=400, detail="decisions require a suite directory")
        try:
            body = await request.json()
        except ValueError:
            raise HTTPException(status_code=400, detail="request body is not valid JSON")
        if not isinstance(body, dict):
            raise HTTPException(status_code=400, detail="request body must be a JSON object")
        try:
            signature = signature_from_json(body["signature"])
            action = Action(body["action"])
            scope = Scope(body["scope"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"malformed decision: {exc}")

        groups = _grouped(source)
        occurrences = groups.get(signature)
        if not occurrences:
            raise HTTPException(status_code=404, detail="no pending change matches that signature")

        decision = make_decision(signature, action, scope)
        try:
            with suite.writer_lock(blocking=False):
                summary = apply_decision(suite, decision, occurrences)
        except SuiteLocked as exc:
            raise HTTPException(status_code=409, detail=str(exc))

        return {
            "action": action.value,
            "scope": scope.value,
            "applied": [
                {
                    "test_id": status.occurrence.test_id,
                    "step_name": status.occurrence.step_name,
                    "handle": status.occurrence.handle,
                    "status": status.status,
                }
                for status in summary.statuses
            ],
            "rules_added": list(summary.rules_added),
            "pending": len(_grouped(source)),
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/", include_in_schema=False)
        def index() -> HTMLResponse:
            return HTMLResponse(_PLACEHOLDER_PAGE)

    return app


def resolve_ui_dir(explicit: Path | None = None) -> Path | None:
    """Locate a built review UI: explicit flag, env var, or ./frontend/dist."""
    import os

    candidates = []
    if explicit is not None:
        candidates.append(Path(explicit))
    env = os.environ.get("AGSDIFF_UI")
    if env:
        candidates.append(Path(env))
    candidates.append(Path.cwd() / "frontend" / "dist")
    for candidate in candidates:
        if candidate.is_dir() and (candidate / "index.html").exists():
            return candidate
    return None
