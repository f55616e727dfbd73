"""FastAPI application implementing the fit-predict wire protocol.

POST /v1/fit_predict takes {task, train: {x, y}, query: {x}, quantiles} and
returns {mean, sd, quantiles}; GET /v1/health reports the backend.  Requests
are validated and size-capped before the backend runs; each request is
stateless (one fit + predict) and a semaphore bounds concurrent fits.
"""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import BackendError, make_backend
from .config import ServerConfig


class RequestError(ValueError):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


def _matrix(obj, name, max_rows, max_cols):
    if not isinstance(obj, list) or not obj:
        raise RequestError(f"{name} must be a nonempty list of rows")
    width = None
    for row in obj:
        if not isinstance(row, list) or not row:
            raise RequestError(f"{name} rows must be nonempty lists")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise RequestError(f"{name} rows have inconsistent lengths")
    if len(obj) > max_rows:
        raise RequestError(f"{name} exceeds the row cap ({max_rows})", status=413)
    if width > max_cols:
        raise RequestError(f"{name} exceeds the column cap ({max_cols})", status=413)
    arr = np.asarray(obj, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise RequestError(f"{name} contains non-finite numbers")
    return arr


def _vector(obj, name, n):
    if not isinstance(obj, list) or len(obj) != n:
        raise RequestError(f"{name} must be a list of length {n}")
    arr = np.asarray(obj, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise RequestError(f"{name} contains non-finite numbers")
    return arr


def parse_request(body, config: ServerConfig):
    if not isinstance(body, dict):
        raise RequestError("body must be a JSON object")
    task = body.get("task")
    if task not in ("regression", "classification"):
        raise RequestError("task must be 'regression' or 'classification'")
    train = body.get("train")
    if not isinstance(train, dict) or "x" not in train or "y" not in train:
        raise RequestError("train must carry x and y")
    x_train = _matrix(train["x"], "train.x", config.max_rows, config.max_cols)
    y_train = _vector(train["y"], "train.y", x_train.shape[0])
    query = body.get("query")
    if not isinstance(query, dict) or "x" not in query:
        raise RequestError("query must carry x")
    x_query = _matrix(query["x"], "query.x", config.max_rows, config.max_cols)
    if x_train.shape[0] + x_query.shape[0] > config.max_rows:
        raise RequestError("combined train + query rows exceed the cap", status=413)
    if x_query.shape[1] != x_train.shape[1]:
        raise RequestError("query.x and train.x must share the column count")
    quantiles = body.get("quantiles", list(config.quantiles))
    if not isinstance(quantiles, list) or not quantiles:
        raise RequestError("quantiles must be a nonempty list")
    q = np.asarray(quantiles, dtype=np.float64)
    if not np.all(np.isfinite(q)) or np.any((q <= 0.0) | (q >= 1.0)):
        raise RequestError("quantiles must lie strictly inside (0, 1)")
    if np.any(np.diff(q) <= 0.0):
        raise RequestError("quantiles must be strictly increasing")
    if task == "classification":
        labels = set(np.unique(y_train))
        if not labels <= {0.0, 1.0}:
            raise RequestError("classification labels must be 0/1")
    return task, x_train, y_train, x_query, q


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    backend = make_backend(config.backend, config.seed)
    gate = threading.BoundedSemaphore(config.max_concurrent_fits)
    app = FastAPI(title="modelserver")
    app.state.config = config
    app.state.backend = backend

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model": backend.name}

    @app.post("/v1/fit_predict")
    async def fit_predict(request: Request):
        try:
            body = await request.json()
        except Exception:  # noqa: BLE001
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        try:
            task, x_train, y_train, x_query, quantiles = parse_request(body, config)
        except RequestError as exc:
            return JSONResponse({"error": str(exc)}, status_code=exc.status)
        try:
            with gate:
                result = backend.fit_predict(task, x_train, y_train, x_query,
                                             quantiles)
        except BackendError as exc:
            return JSONResponse({"error": str(exc)}, status_code=500)
        except Exception as exc:  # noqa: BLE001 - backend crash maps to 500
            return JSONResponse({"error": f"backend failure: {exc}"}, status_code=500)
        mean = np.asarray(result["mean"], dtype=np.float64).ravel()
        sd = np.asarray(result["sd"], dtype=np.float64).ravel()
        q = np.asarray(result["quantiles"], dtype=np.float64)
        q = np.sort(q, axis=1)  # enforce nondecreasing rows
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(sd))
                and np.all(np.isfinite(q))):
            return JSONResponse({"error": "backend produced non-finite numbers"},
                                status_code=500)
        return {"mean": mean.tolist(), "sd": sd.tolist(), "quantiles": q.tolist()}

    return app
