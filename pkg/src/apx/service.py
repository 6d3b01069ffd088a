"""FastAPI service wrapping the experiment registry.

Endpoints:
    GET  /experiments                 -> registry listing
    GET  /experiments/{name}          -> description and default parameters
    POST /experiments/{name}/run      -> run and return tables + metrics

Artifacts are returned in the response body (the service holds no state);
clients decide where to write them.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, experiments
from .errors import ApxError, BadParameterError, BlowUpError, DivergedError, \
    UnknownExperimentError


class ExperimentInfo(BaseModel):
    name: str
    description: str
    defaults: Dict[str, Any] = Field(default_factory=dict)


class ExperimentList(BaseModel):
    experiments: List[ExperimentInfo]


class RunRequest(BaseModel):
    params: Dict[str, Any] = Field(default_factory=dict)


class FileArtifact(BaseModel):
    name: str
    text: str


class RunResponse(BaseModel):
    experiment: str
    params: Dict[str, Any]
    metrics: Dict[str, Any]
    files: List[FileArtifact]


def create_app() -> FastAPI:
    app = FastAPI(title="apx", version=__version__,
                  description="Perturbation-method experiments with "
                              "numerical cross-checks")

    @app.get("/experiments", response_model=ExperimentList)
    def list_all() -> ExperimentList:
        items = [
            ExperimentInfo(name=name, description=desc,
                           defaults=experiments.REGISTRY[name].defaults)
            for name, desc in experiments.list_experiments()
        ]
        return ExperimentList(experiments=items)

    @app.get("/experiments/{name}", response_model=ExperimentInfo)
    def describe(name: str) -> ExperimentInfo:
        if name not in experiments.REGISTRY:
            raise HTTPException(status_code=404,
                                detail=f"unknown experiment {name!r}")
        spec = experiments.REGISTRY[name]
        return ExperimentInfo(name=spec.name, description=spec.description,
                              defaults=spec.defaults)

    @app.post("/experiments/{name}/run", response_model=RunResponse)
    def run(name: str, request: RunRequest) -> RunResponse:
        try:
            params, result = experiments.run_experiment(name, request.params)
        except UnknownExperimentError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except BadParameterError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (BlowUpError, DivergedError) as exc:
            return JSONResponse(
                status_code=500,
                content={"detail": {"code": "numerical-failure",
                                    "message": str(exc)}})
        files = [FileArtifact(name=fname, text=experiments.render_csv(tbl))
                 for fname, tbl in result.tables.items()]
        return RunResponse(experiment=name, params=params,
                           metrics=_jsonable(result.metrics), files=files)

    return app


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return obj.item()
    return obj
