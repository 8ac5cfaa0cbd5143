"""HTTP facade for the dashboard.

Synchronous endpoints for the tests and PKBD sampling; background jobs
with polling for the two long-running operations (bandwidth selection
and clustering). Uploaded datasets live in an in-memory session store
with a one-hour TTL and a 20 MB per-file limit. Identical requests with
identical seeds return identical bodies, and every numeric payload
matches the CLI output for the same inputs.
"""

from __future__ import annotations

import csv
import io
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.encoders import jsonable_encoder
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__
from .cli import SCHEMA_VERSION, jsonify, outcome_payload
from .clustering import (ClusterConfig, adjusted_rand_index,
                         in_group_proportion, ksample_test,
                         macro_precision_recall, pkbc_fit,
                         sphere_display_coordinates)
from .core import RandomSource, descriptive_stats
from .gof import ResamplingPlan, normality_test, summarize, twosample_test
from .pkbd import rpkb
from .tuning import AlternativeSpec, select_h
from .uniformity import pk_test

MAX_UPLOAD_BYTES = 20 * 1024 * 1024
SESSION_TTL_SECONDS = 3600


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


# ---------------------------------------------------------------------------
# session store and job registry
# ---------------------------------------------------------------------------


class SessionStore:
    """TTL-evicting map of unguessable ids to datasets and fitted models."""

    def __init__(self, ttl: float = SESSION_TTL_SECONDS):
        self._ttl = ttl
        self._lock = threading.Lock()
        self._items: dict = {}

    def put(self, kind: str, payload) -> str:
        item_id = f"{kind}-{secrets.token_hex(12)}"
        with self._lock:
            self._evict()
            self._items[item_id] = (time.monotonic() + self._ttl, payload)
        return item_id

    def get(self, item_id: str, kind: str):
        with self._lock:
            self._evict()
            entry = self._items.get(item_id)
        if entry is None or not item_id.startswith(f"{kind}-"):
            raise ApiError(404, "not_found", f"unknown {kind} id", item_id)
        return entry[1]

    def _evict(self):
        now = time.monotonic()
        stale = [k for k, (exp, _) in self._items.items() if exp < now]
        for k in stale:
            del self._items[k]


class JobRecord:
    def __init__(self, job_id: str):
        self.job_id = job_id
        self.status = "queued"
        self.result = None
        self.error = None
        self.cancel_requested = False
        self.lock = threading.Lock()

    def snapshot(self) -> dict:
        with self.lock:
            payload = {"job_id": self.job_id, "status": self.status}
            if self.status == "done":
                payload["result"] = self.result
            if self.status == "failed":
                payload["error"] = self.error
            return payload


class JobRegistry:
    def __init__(self, workers: int = 2):
        self._executor = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()

    def submit(self, fn) -> JobRecord:
        record = JobRecord(f"job-{secrets.token_hex(12)}")
        with self._lock:
            self._jobs[record.job_id] = record

        def run():
            with record.lock:
                if record.cancel_requested:
                    record.status = "cancelled"
                    return
                record.status = "running"
            try:
                result = fn(lambda: record.cancel_requested)
                with record.lock:
                    if record.cancel_requested:
                        record.status = "cancelled"  # discard, never store
                    else:
                        record.status = "done"
                        record.result = result
            except Exception as exc:  # surfaced through the job status
                with record.lock:
                    if record.cancel_requested:
                        record.status = "cancelled"
                    else:
                        record.status = "failed"
                        record.error = str(exc)

        self._executor.submit(run)
        return record

    def get(self, job_id: str) -> JobRecord:
        with self._lock:
            record = self._jobs.get(job_id)
        if record is None:
            raise ApiError(404, "not_found", "unknown job id", job_id)
        return record

    def cancel(self, job_id: str) -> JobRecord:
        record = self.get(job_id)
        with record.lock:
            record.cancel_requested = True
            if record.status == "queued":
                record.status = "cancelled"
        return record


class JobCancelled(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# request models
# ---------------------------------------------------------------------------


class PlanParams(BaseModel):
    method: str = "subsampling"
    B: int = Field(default=150, ge=1)
    b: float = Field(default=0.9, gt=0.0, le=1.0)
    quantile: float = Field(default=0.95, gt=0.0, lt=1.0)


class NormalityRequest(BaseModel):
    dataset_id: str
    h: float = Field(gt=0)
    B: int = Field(default=150, ge=1)
    quantile: float = Field(default=0.95, gt=0.0, lt=1.0)
    centering: str = "nonparam"
    mu_hat: list[float] | None = None
    sigma_hat: list[list[float]] | None = None
    seed: int = 0


class TwoSampleRequest(BaseModel):
    dataset_id: str
    dataset_id_y: str
    h: float = Field(gt=0)
    plan: PlanParams = PlanParams()
    seed: int = 0


class KSampleRequest(BaseModel):
    dataset_id: str
    labels_col: int = Field(ge=1)
    h: float = Field(gt=0)
    plan: PlanParams = PlanParams()
    seed: int = 0


class UniformityRequest(BaseModel):
    dataset_id: str
    rho: float = Field(gt=0.0, lt=1.0)
    B: int = Field(default=300, ge=1)
    quantile: float = Field(default=0.95, gt=0.0, lt=1.0)
    seed: int = 0


class SelectHRequest(BaseModel):
    dataset_id: str
    dataset_id_y: str | None = None
    labels_col: int | None = Field(default=None, ge=1)
    alternative: str = "location"
    deltas: list[float] | None = None
    h_grid: list[float] = [0.6, 1.0, 1.4, 1.8, 2.2]
    n_rep: int = Field(default=50, ge=1)
    plan: PlanParams = PlanParams()
    seed: int = 0
    threads: int = Field(default=1, ge=1)


class PkbdSampleRequest(BaseModel):
    n: int = Field(ge=1, le=1_000_000)
    rho: float = Field(gt=0.0, lt=1.0)
    mu: list[float]
    method: str = "rejacg"
    seed: int = 0


class ClusteringRequest(BaseModel):
    dataset_id: str
    k_values: list[int]
    num_init: int = Field(default=10, ge=1)
    max_iter: int = Field(default=300, ge=1)
    stopping_rule: str = "loglik"
    true_labels_col: int | None = Field(default=None, ge=1)
    normalize: bool = False
    seed: int = 0


class KsampleCheckRequest(BaseModel):
    fit_id: str
    k: int
    h: float = Field(default=1.5, gt=0)
    plan: PlanParams = PlanParams()
    seed: int = 0


# ---------------------------------------------------------------------------
# app factory
# ---------------------------------------------------------------------------


def _plan(params: PlanParams) -> ResamplingPlan:
    try:
        return ResamplingPlan(method=params.method, B=params.B, b=params.b,
                              quantile=params.quantile)
    except ValueError as exc:
        raise ApiError(400, "invalid_params", str(exc))


def _summary_payload(outcome, x, y=None, labels=None) -> dict:
    summary = summarize(outcome, x, y=y, labels=labels)
    return {
        "summary_statistics": summary.tables.to_records(),
        "qq_series": summary.qq_series,
    }


def _split_labels(data: np.ndarray, labels_col: int):
    if not 1 <= labels_col <= data.shape[1]:
        raise ApiError(400, "invalid_params",
                       f"labels_col {labels_col} out of range for "
                       f"{data.shape[1]} columns")
    labels = data[:, labels_col - 1]
    return np.delete(data, labels_col - 1, axis=1), labels


def create_app() -> FastAPI:
    app = FastAPI(title="kbqd service", version=__version__,
                  openapi_url="/v1/openapi.json")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore()
    jobs = JobRegistry()
    app.state.store = store
    app.state.jobs = jobs

    @app.exception_handler(ApiError)
    async def api_error_handler(_, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={
            "code": exc.code, "message": exc.message, "detail": exc.detail})

    @app.exception_handler(ValueError)
    async def value_error_handler(_, exc: ValueError):
        return JSONResponse(status_code=400, content={
            "code": "invalid_params", "message": str(exc), "detail": None})

    # ------------------------------------------------------------------ data

    @app.post("/v1/data")
    async def upload_data(file: UploadFile = File(...),
                          delimiter: str = Form(","),
                          has_header: bool = Form(False)):
        raw = await file.read(MAX_UPLOAD_BYTES + 1)
        if len(raw) > MAX_UPLOAD_BYTES:
            raise ApiError(413, "too_large",
                           "upload exceeds the 20 MB limit", file.filename)
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ApiError(422, "parse_error", "file is not UTF-8 text",
                           str(exc))
        rows = []
        header = None
        reader = csv.reader(io.StringIO(text), delimiter=delimiter)
        for line_no, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if has_header and header is None:
                header = [c.strip() for c in row]
                continue
            try:
                values = [float(c) for c in row]
            except ValueError:
                raise ApiError(422, "parse_error",
                               f"non-numeric cell at row {line_no}",
                               row) from None
            if rows and len(values) != len(rows[0]):
                raise ApiError(422, "parse_error",
                               f"row {line_no} has {len(values)} fields, "
                               f"expected {len(rows[0])}", None)
            rows.append(values)
        if not rows:
            raise ApiError(422, "parse_error", "no data rows", file.filename)
        data = np.asarray(rows)
        dataset_id = store.put("data", {"data": data, "header": header})
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset_id": dataset_id,
            "n": int(data.shape[0]),
            "d": int(data.shape[1]),
            "columns": header or [f"Feature {j}" for j in range(data.shape[1])],
            "column_summary": jsonify(descriptive_stats(data).to_records()),
        }

    def _dataset(dataset_id: str) -> np.ndarray:
        return store.get(dataset_id, "data")["data"]

    # ----------------------------------------------------------------- tests

    @app.post("/v1/tests/normality")
    def test_normality(req: NormalityRequest):
        x = _dataset(req.dataset_id)
        out = normality_test(
            x, req.h,
            mu_hat=None if req.mu_hat is None else np.array(req.mu_hat),
            sigma_hat=None if req.sigma_hat is None else np.array(req.sigma_hat),
            centering=req.centering,
            plan=ResamplingPlan(B=req.B, quantile=req.quantile),
            rng=RandomSource(req.seed))
        return jsonify({**outcome_payload(out), **_summary_payload(out, x)})

    @app.post("/v1/tests/twosample")
    def test_twosample(req: TwoSampleRequest):
        x = _dataset(req.dataset_id)
        y = _dataset(req.dataset_id_y)
        out = twosample_test(x, y, req.h, _plan(req.plan),
                             RandomSource(req.seed))
        return jsonify({**outcome_payload(out),
                        **_summary_payload(out, x, y=y)})

    @app.post("/v1/tests/ksample")
    def test_ksample(req: KSampleRequest):
        data = _dataset(req.dataset_id)
        features, labels = _split_labels(data, req.labels_col)
        out = ksample_test(features, labels, req.h, _plan(req.plan),
                           RandomSource(req.seed))
        return jsonify({**outcome_payload(out),
                        **_summary_payload(out, features, labels=labels)})

    @app.post("/v1/tests/uniformity")
    def test_uniformity(req: UniformityRequest):
        x = _dataset(req.dataset_id)
        out = pk_test(x, req.rho, B=req.B, quantile=req.quantile,
                      rng=RandomSource(req.seed))
        payload = {
            "schema_version": SCHEMA_VERSION,
            "test_type": out.test_type,
            "rho": out.rho,
            "un": out.un,
            "tn_normalized": out.tn_normalized,
            "un_critical": out.un_critical,
            "reject_u": out.reject_u,
            "vn": out.vn,
            "vn_cutoff": out.vn_cutoff,
            "reject_v": out.reject_v,
            "dof": out.dof,
            "c_constant": out.c_constant,
            "var_un": out.var_un,
            "quantile": out.quantile,
            "b_replicates": out.b_used,
            "h0_rejected": out.h0_rejected,
        }
        return jsonify({**payload, **_summary_payload(out, x)})

    # ---------------------------------------------------------------- tuning

    @app.post("/v1/tuning/select-h")
    def tuning_select_h(req: SelectHRequest):
        x = _dataset(req.dataset_id)
        if req.dataset_id_y is not None:
            y = _dataset(req.dataset_id_y)
        elif req.labels_col is not None:
            x, y = _split_labels(x, req.labels_col)
        else:
            y = None
        try:
            spec = AlternativeSpec(req.alternative,
                                   tuple(req.deltas or ()))
        except ValueError as exc:
            raise ApiError(400, "invalid_params", str(exc))
        plan = _plan(req.plan)

        def work(should_stop):
            res = select_h(x, y, spec, h_grid=req.h_grid, n_rep=req.n_rep,
                           plan=plan, rng=RandomSource(req.seed),
                           n_jobs=req.threads, should_stop=should_stop)
            if should_stop():
                raise JobCancelled()
            return jsonify({
                "schema_version": SCHEMA_VERSION,
                "h_selected": res.h_selected,
                "delta_selected": res.delta_selected,
                "power_at_selection": res.power_at_selection,
                "alternative": spec.family,
                "deltas": list(spec.deltas),
                "power_curve": res.curve.to_records(),
            })

        record = jobs.submit(work)
        return {"job_id": record.job_id, "status": record.status}

    # ------------------------------------------------------------------ jobs

    @app.get("/v1/jobs/{job_id}")
    def job_status(job_id: str):
        return jsonable_encoder(jobs.get(job_id).snapshot())

    @app.post("/v1/jobs/{job_id}/cancel")
    def job_cancel(job_id: str):
        record = jobs.cancel(job_id)
        return {"job_id": record.job_id, "status": record.snapshot()["status"],
                "cancel_requested": True}

    # ------------------------------------------------------------------ pkbd

    @app.post("/v1/pkbd/sample")
    def pkbd_sample(req: PkbdSampleRequest):
        report = rpkb(req.n, np.array(req.mu), req.rho, method=req.method,
                      rng=RandomSource(req.seed))
        d = report.samples.shape[1]
        payload = {
            "schema_version": SCHEMA_VERSION,
            "method": report.method,
            "n": req.n,
            "rho": req.rho,
            "mu": req.mu,
            "proposals_used": report.proposals_used,
            "acceptance_rate": report.acceptance_rate,
            "samples": report.samples.tolist(),
        }
        if d <= 3:
            payload["plot"] = {
                "kind": "circle" if d == 2 else "sphere",
                "coordinates": report.samples.tolist(),
            }
        else:
            payload["plot"] = None
        return jsonify(payload)

    # ------------------------------------------------------------ clustering

    @app.post("/v1/clustering/run")
    def clustering_run(req: ClusteringRequest):
        data = _dataset(req.dataset_id)
        true_labels = None
        if req.true_labels_col is not None:
            data, true_labels = _split_labels(data, req.true_labels_col)
        if req.normalize:
            norms = np.linalg.norm(data, axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise ApiError(400, "invalid_params",
                               "cannot L2-normalize a zero row")
            data = data / norms
        try:
            base_config = ClusterConfig(n_clust=tuple(req.k_values),
                                        max_iter=req.max_iter,
                                        stopping_rule=req.stopping_rule,
                                        num_init=req.num_init)
        except ValueError as exc:
            raise ApiError(400, "invalid_params", str(exc))

        def work(should_stop):
            fits = {}
            for k in base_config.n_clust:
                if should_stop():
                    raise JobCancelled()
                single = ClusterConfig(n_clust=(k,),
                                       max_iter=base_config.max_iter,
                                       stopping_rule=base_config.stopping_rule,
                                       num_init=base_config.num_init)
                fits.update(pkbc_fit(data, single, RandomSource(req.seed)))
            if should_stop():
                raise JobCancelled()
            fit_id = store.put("fit", {"data": data, "fits": fits,
                                       "true_labels": true_labels})
            per_k = {}
            for k, fit in sorted(fits.items()):
                entry = {
                    "k": k,
                    "alpha": fit.alpha.tolist(),
                    "mu": fit.mu.tolist(),
                    "rho": fit.rho.tolist(),
                    "log_lik": fit.log_lik,
                    "wcss_euclidean": fit.wcss_euclidean,
                    "wcss_cosine": fit.wcss_cosine,
                    "final_memberships": fit.final_memberships.tolist(),
                    "igp": in_group_proportion(data, fit.final_memberships),
                }
                if true_labels is not None:
                    entry["ari"] = adjusted_rand_index(
                        true_labels, fit.final_memberships)
                    prec, rec = macro_precision_recall(
                        true_labels, fit.final_memberships)
                    entry["macro_precision"] = prec
                    entry["macro_recall"] = rec
                per_k[str(k)] = entry
            coords = sphere_display_coordinates(data)
            return jsonify({
                "schema_version": SCHEMA_VERSION,
                "fit_id": fit_id,
                "k_values": list(base_config.n_clust),
                "fits": per_k,
                "elbow": [{"k": k, "wcss_euclidean": f.wcss_euclidean,
                           "wcss_cosine": f.wcss_cosine}
                          for k, f in sorted(fits.items())],
                "sphere_coordinates": coords.tolist(),
                "true_labels": None if true_labels is None
                else [int(v) for v in true_labels],
            })

        record = jobs.submit(work)
        return {"job_id": record.job_id, "status": record.status}

    @app.post("/v1/clustering/ksample-check")
    def clustering_ksample_check(req: KsampleCheckRequest):
        entry = store.get(req.fit_id, "fit")
        fits = entry["fits"]
        if req.k not in fits:
            raise ApiError(404, "not_found",
                           f"fit has no k={req.k}", sorted(fits))
        fit = fits[req.k]
        counts = np.bincount(fit.final_memberships)[1:]
        if counts.min() < 2:
            raise ApiError(400, "invalid_params",
                           "a fitted cluster has fewer than two members")
        out = ksample_test(entry["data"], fit.final_memberships, req.h,
                           _plan(req.plan), RandomSource(req.seed))
        return jsonify({**outcome_payload(out), "k": req.k})

    return app


app = create_app()


def run(host: str = "127.0.0.1", port: int = 8000):
    """Serve the API with uvicorn."""
    import uvicorn

    uvicorn.run(app, host=host, port=port)
