"""HTTP facade over split generation, evaluation and report rendering.

Evaluation requests reference embedding files by server-side path: the
binary payloads are tens of megabytes and live where the trainers wrote
them, so the service is meant to run next to that filesystem (the CLI runs
it in-process by default). Every domain error is returned as a JSON body
``{"error": <slug>, "message": ...}`` with the slug taken from the
exception class, which clients map onto exit codes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__, metrics, splits, store
from .errors import InvalidArgumentError, NotFoundError, NovevalError

app = FastAPI(
    title="noveval",
    version=__version__,
    description="Novel-class retrieval benchmark service",
)


@app.exception_handler(NovevalError)
async def _domain_error(request: Request, exc: NovevalError) -> JSONResponse:
    status = 404 if isinstance(exc, NotFoundError) else 400
    return JSONResponse(
        status_code=status, content={"error": exc.slug, "message": str(exc)}
    )


class TaxonomyDoc(BaseModel):
    dataset: str
    classes: list[str]
    groups: dict[str, str] | None = None


class SplitDoc(BaseModel):
    dataset: str
    method: Literal["random", "stratified_random", "semantic", "builtin"]
    kind: Literal["random", "semantic"] | None = None
    seed: int | None = Field(default=None, ge=0)
    base: list[str]
    novel: list[str]

    @classmethod
    def from_spec(cls, spec: splits.SplitSpec) -> "SplitDoc":
        return cls(**splits.split_to_dict(spec))

    def to_spec(self) -> splits.SplitSpec:
        return splits.split_from_dict(self.model_dump())


class GenerateSplitRequest(BaseModel):
    taxonomy: TaxonomyDoc
    method: Literal["random", "stratified_random", "semantic"]
    n_base: int | None = None
    seed: int | None = None
    base_groups: list[str] | None = None


class ClassStatsDoc(BaseModel):
    r_precision: float
    queries: int
    class_size: int


class ReportDoc(BaseModel):
    dataset: str | None
    split: str
    algorithm: str
    base_r_precision: float | None
    novel_r_precision: float | None
    per_class: dict[str, ClassStatsDoc]
    warnings: list[str] = Field(default_factory=list)
    metadata: dict = Field(default_factory=dict)

    @classmethod
    def from_report(cls, report: metrics.MetricsReport) -> "ReportDoc":
        return cls(**metrics.report_to_dict(report))

    def to_report(self) -> metrics.MetricsReport:
        return metrics.report_from_dict(self.model_dump())


class EvaluateRequest(BaseModel):
    embeddings_path: str
    split: SplitDoc
    algorithm: str | None = None
    workers: int = Field(default=0, ge=0)


class EvaluateResponse(BaseModel):
    report: ReportDoc
    ignored_train_rows: int


class RenderRequest(BaseModel):
    reports: list[ReportDoc]
    format: Literal["csv", "markdown"]


class RenderResponse(BaseModel):
    text: str


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.get("/datasets")
def datasets() -> dict:
    return {
        "datasets": list(splits.BUILTIN_DATASETS),
        "kinds": list(splits.BUILTIN_KINDS),
    }


@app.get("/taxonomies/{dataset}", response_model=TaxonomyDoc)
def get_taxonomy(dataset: str) -> TaxonomyDoc:
    return TaxonomyDoc(**splits.taxonomy_to_dict(splits.builtin_taxonomy(dataset)))


@app.get("/splits/builtin/{dataset}/{kind}", response_model=SplitDoc)
def get_builtin_split(dataset: str, kind: str) -> SplitDoc:
    return SplitDoc.from_spec(splits.builtin_split(dataset, kind))


@app.post("/splits/generate", response_model=SplitDoc)
def generate_split(req: GenerateSplitRequest) -> SplitDoc:
    taxonomy = splits.taxonomy_from_dict(req.taxonomy.model_dump())
    if req.method in ("random", "stratified_random"):
        if req.n_base is None or req.seed is None:
            raise InvalidArgumentError(
                f"method '{req.method}' requires n_base and seed"
            )
        fn = splits.random_split if req.method == "random" else splits.stratified_random_split
        spec = fn(taxonomy, req.n_base, req.seed)
    else:
        if not req.base_groups:
            raise InvalidArgumentError("method 'semantic' requires base_groups")
        spec = splits.semantic_split(taxonomy, req.base_groups)
    return SplitDoc.from_spec(spec)


@app.post("/evaluate", response_model=EvaluateResponse)
def evaluate(req: EvaluateRequest) -> EvaluateResponse:
    eset = store.read_embedding_set(Path(req.embeddings_path))
    test_mask = [t == "test" for t in eset.tags]
    ignored = eset.n - sum(test_mask)
    if ignored:
        eset = eset.select(test_mask)
    report = metrics.evaluate_split(
        eset,
        req.split.to_spec(),
        algorithm=req.algorithm,
        workers=req.workers,
    )
    return EvaluateResponse(report=ReportDoc.from_report(report), ignored_train_rows=ignored)


@app.post("/reports/render", response_model=RenderResponse)
def render(req: RenderRequest) -> RenderResponse:
    reports = [doc.to_report() for doc in req.reports]
    return RenderResponse(text=metrics.render_report(reports, req.format))
