"""Client for the fit-predict wire protocol.

One POST /v1/fit_predict round trip per call; the JSON body carries the
training set, the query rows, and the quantile grid, and the response is
validated against the PredictiveDistribution invariants.  Failures map to
distinct exception classes and are never retried.
"""

from __future__ import annotations

import numpy as np
import requests

from ..data import Dataset
from .base import FittedModel, Predictor, PredictiveDistribution, QUANTILE_GRID


class RemoteError(RuntimeError):
    """Base class for remote-predictor failures."""


class RemoteTransportError(RemoteError):
    """Connection could not be established or broke mid-request."""


class RemoteTimeoutError(RemoteError):
    pass


class RemoteServerError(RemoteError):
    """Server answered with an error status/payload."""


class RemoteProtocolError(RemoteError):
    """Response parsed but violates the wire contract."""


def _finite_listing(arr) -> bool:
    a = np.asarray(arr, dtype=np.float64)
    return bool(np.all(np.isfinite(a)))


def remote_predict(endpoint: str, train: Dataset, query: Dataset,
                   task: str = "reg", timeout_ms: int = 60_000) -> PredictiveDistribution:
    """Fit-predict round trip against ``endpoint``.

    Parameters
    ----------
    endpoint : base URL of a server implementing the protocol
    train : labeled dataset shipped as the training block
    query : rows to predict
    task : 'reg' or 'cls'; classification servers return P(Y=1|x) as the mean
    timeout_ms : per-request timeout
    """
    if not train.is_labeled:
        raise ValueError("remote_predict requires a labeled training set")
    if task not in ("reg", "cls"):
        raise ValueError("task must be 'reg' or 'cls'")
    body = {
        "task": "regression" if task == "reg" else "classification",
        "train": train.to_wire(),
        "query": {"x": query.features.tolist()},
        "quantiles": list(QUANTILE_GRID),
    }
    url = endpoint.rstrip("/") + "/v1/fit_predict"
    try:
        resp = requests.post(url, json=body, timeout=timeout_ms / 1000.0)
    except requests.Timeout as exc:
        raise RemoteTimeoutError(f"request to {url} timed out") from exc
    except requests.RequestException as exc:
        raise RemoteTransportError(f"transport failure for {url}: {exc}") from exc

    if resp.status_code != 200:
        try:
            msg = resp.json().get("error", resp.text)
        except ValueError:
            msg = resp.text
        raise RemoteServerError(f"server returned {resp.status_code}: {msg}")
    try:
        payload = resp.json()
    except ValueError as exc:
        raise RemoteProtocolError("response body is not JSON") from exc
    for key in ("mean", "sd", "quantiles"):
        if key not in payload:
            raise RemoteProtocolError(f"response missing field {key!r}")
        if not _finite_listing(payload[key]):
            raise RemoteProtocolError(f"response field {key!r} contains non-finite numbers")
    try:
        return PredictiveDistribution(
            np.asarray(payload["mean"], dtype=np.float64),
            np.asarray(payload["sd"], dtype=np.float64),
            np.asarray(payload["quantiles"], dtype=np.float64),
        )
    except ValueError as exc:
        raise RemoteProtocolError(str(exc)) from exc


def remote_health(endpoint: str, timeout_ms: int = 10_000) -> dict:
    url = endpoint.rstrip("/") + "/v1/health"
    try:
        resp = requests.get(url, timeout=timeout_ms / 1000.0)
    except requests.Timeout as exc:
        raise RemoteTimeoutError(f"request to {url} timed out") from exc
    except requests.RequestException as exc:
        raise RemoteTransportError(f"transport failure for {url}: {exc}") from exc
    if resp.status_code != 200:
        raise RemoteServerError(f"health check returned {resp.status_code}")
    return resp.json()


class _FittedRemote(FittedModel):
    def __init__(self, endpoint, train, task, timeout_ms):
        self._endpoint = endpoint
        self._train = train
        self._task = task
        self._timeout_ms = timeout_ms

    def predict(self, query: Dataset) -> PredictiveDistribution:
        return remote_predict(self._endpoint, self._train, query,
                              self._task, self._timeout_ms)


class RemotePredictor(Predictor):
    """Predictor adapter: defers the model entirely to a prediction service."""

    def __init__(self, endpoint: str, task: str = "reg", timeout_ms: int = 60_000):
        self.endpoint = endpoint
        self.task = task
        self.timeout_ms = timeout_ms

    def fit(self, train: Dataset) -> FittedModel:
        return _FittedRemote(self.endpoint, train, self.task, self.timeout_ms)
