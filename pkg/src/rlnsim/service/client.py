"""Thin service client: in-process app by default, remote server when given a URL."""

import warnings

import httpx

with warnings.catch_warnings():
    warnings.filterwarnings("ignore", message=".*testclient.*")
    from fastapi.testclient import TestClient

from .app import create_app


class ServiceError(Exception):
    def __init__(self, status_code: int, detail):
        self.status_code = status_code
        self.detail = detail
        super().__init__(f"service returned {status_code}: {detail}")

    @property
    def config_key(self) -> str | None:
        if isinstance(self.detail, dict):
            return self.detail.get("key")
        return None


class ServiceClient:
    """Same interface whether the service runs in-process or over the network."""

    def __init__(self, base_url: str | None = None):
        if base_url is None:
            self._client: httpx.Client = TestClient(create_app())
        else:
            self._client = httpx.Client(base_url=base_url, timeout=300.0)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _request(self, method: str, path: str, **kwargs) -> dict:
        try:
            response = self._client.request(method, path, **kwargs)
        except httpx.HTTPError as exc:
            raise ServiceError(0, f"transport failure: {exc}")
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceError(response.status_code, detail)
        return response.json()

    def health(self) -> dict:
        return self._request("GET", "/health")

    def scenarios(self) -> list[str]:
        return self._request("GET", "/scenarios")["scenarios"]

    def run(self, config: dict, seed: int | None = None, until: float | None = None) -> dict:
        body = {"config": config, "seed": seed, "until": until}
        return self._request("POST", "/run", json=body)

    def vectors(self) -> dict:
        return self._request("GET", "/vectors")

    def epoch(self, unix_time: float, T: int) -> int:
        params = {"unix_time": unix_time, "T": T}
        return self._request("GET", "/epoch", params=params)["epoch"]

    def thr(self, network_delay: float, clock_asynchrony: float, T: int) -> int:
        params = {"network_delay": network_delay, "clock_asynchrony": clock_asynchrony, "T": T}
        return self._request("GET", "/thr", params=params)["thr"]

    def report_diff(self, first: dict, second: dict) -> dict:
        body = {"first": first, "second": second}
        return self._request("POST", "/report-diff", json=body)
