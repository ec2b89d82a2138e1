"""HTTP plumbing shared by the harvesters: a rate limiter and a retrying GET."""

from __future__ import annotations

import logging
import random
import threading
import time
from email.utils import parsedate_to_datetime

import requests

log = logging.getLogger(__name__)


class NetworkError(RuntimeError):
    pass


class RateLimited(NetworkError):
    pass


class NotFound(LookupError):
    pass


class MalformedResponse(ValueError):
    pass


class RateLimiter:
    """Spaces calls at least ``1 / rate`` seconds apart across threads."""

    def __init__(self, rate: float):
        self.interval = 1.0 / rate if rate and rate > 0 else 0.0
        self._next = 0.0
        self._lock = threading.Lock()

    def wait(self):
        if not self.interval:
            return
        with self._lock:
            now = time.monotonic()
            delay = self._next - now
            self._next = max(now, self._next) + self.interval
        if delay > 0:
            time.sleep(delay)


def _retry_after(resp, default: float) -> float:
    value = resp.headers.get("Retry-After")
    if not value:
        return default
    try:
        return max(0.0, float(value))
    except ValueError:
        pass
    try:
        return max(0.0, parsedate_to_datetime(value).timestamp() - time.time())
    except (TypeError, ValueError):
        return default


class HttpClient:
    def __init__(
        self,
        rate: float = 5.0,
        max_attempts: int = 5,
        backoff: float = 1.0,
        max_rate_limited: int = 20,
        max_retry_after: float = 120.0,
        timeout: float = 30.0,
        user_agent: str = "noticedetect/0.1",
        session=None,
    ):
        self.limiter = RateLimiter(rate)
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.max_rate_limited = max_rate_limited
        self.max_retry_after = max_retry_after
        self.timeout = timeout
        self.session = session or requests.Session()
        self.session.headers.setdefault("User-Agent", user_agent)
        self.session.headers["User-Agent"] = user_agent

    def get(self, url: str, params=None) -> requests.Response:
        """GET with exponential backoff on network/5xx errors and Retry-After on 429."""
        failures = throttled = 0
        while True:
            self.limiter.wait()
            try:
                resp = self.session.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                failures += 1
                if failures >= self.max_attempts:
                    raise NetworkError(f"GET {url}: {exc}") from exc
                self._sleep_backoff(failures, exc)
                continue
            if resp.status_code == 404:
                raise NotFound(url)
            if resp.status_code == 429:
                throttled += 1
                if throttled > self.max_rate_limited:
                    raise RateLimited(f"GET {url}: still rate limited after {throttled} tries")
                wait = min(_retry_after(resp, self.backoff), self.max_retry_after)
                log.warning("rate limited on %s, sleeping %.1fs", url, wait)
                time.sleep(wait)
                continue
            if resp.status_code >= 500:
                failures += 1
                if failures >= self.max_attempts:
                    raise NetworkError(f"GET {url}: HTTP {resp.status_code}")
                self._sleep_backoff(failures, f"HTTP {resp.status_code}")
                continue
            if resp.status_code >= 400:
                raise NetworkError(f"GET {url}: HTTP {resp.status_code}")
            return resp

    def get_json(self, url: str, params=None):
        resp = self.get(url, params)
        try:
            return resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"{url}: {exc}") from exc

    def _sleep_backoff(self, attempt: int, why):
        delay = self.backoff * (2 ** (attempt - 1)) * (0.5 + random.random() / 2)
        log.warning("request failed (%s), retry %d in %.2fs", why, attempt, delay)
        time.sleep(delay)
