"""Publish/fetch exchange for processed profiles.

The decentralized flow needs exactly one shared piece: a dumb relay where
confirmed-case processed profiles are posted and from which every device
pulls whatever it has not seen yet, matching locally. Devices never upload
scans or identifiers; the only thing a sync sends upstream is its fetch
cursor.

Wire protocol (curl-friendly, byte-exact):

    POST /v1/profiles            body = profile file bytes -> "<recordId>\\n"
    GET  /v1/profiles?since=<id> -> concatenated frames, each
         "record id=<n> at=<epoch> len=<k>\\n" + k payload bytes + "\\n"

The server persists an append-only log of the same frames; recovery replays
the log and drops a torn trailing frame. Publishing identical bytes twice
returns the original record id.
"""

from __future__ import annotations

import hashlib
import os
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .detection import ContactReport, DetectionConfig, match_and_notify
from .model import ProcessedProfile, SignalProfile
from .profileio import ProfileFormatError, parse_profile

DEFAULT_RETENTION_DAYS = 28
TOKEN_HEADER = "X-Upload-Token"
TOKEN_ENV_VAR = "WIFITRACE_UPLOAD_TOKEN"


class ExchangeError(Exception):
    """Exchange request failed after retries; local state is unchanged."""


@dataclass(frozen=True)
class PublishedRecord:
    record_id: int
    profile_bytes: bytes
    published_at: int


def _frame(record: PublishedRecord) -> bytes:
    header = (
        f"record id={record.record_id} at={record.published_at} "
        f"len={len(record.profile_bytes)}\n"
    )
    return header.encode("ascii") + record.profile_bytes + b"\n"


def _read_frames(data: bytes) -> tuple[list[PublishedRecord], int]:
    """Parse concatenated frames; returns records and the offset of the
    first byte that could not be parsed (== len(data) when clean)."""
    records: list[PublishedRecord] = []
    pos = 0
    while pos < len(data):
        nl = data.find(b"\n", pos)
        if nl < 0:
            break
        try:
            fields = dict(
                part.split("=", 1)
                for part in data[pos:nl].decode("ascii").split(" ")[1:]
            )
            if not data[pos:nl].startswith(b"record "):
                break
            rid, at, length = int(fields["id"]), int(fields["at"]), int(fields["len"])
        except (ValueError, KeyError, UnicodeDecodeError):
            break
        start, end = nl + 1, nl + 1 + length
        if end + 1 > len(data) or data[end:end + 1] != b"\n":
            break
        records.append(PublishedRecord(rid, data[start:end], at))
        pos = end + 1
    return records, pos


class ProfileStore:
    """Append-only, durably logged store of published processed profiles.

    Thread safe: publishes serialize through a lock (record ids form a total
    order consistent with acknowledgment order); reads take a snapshot.
    """

    LOG_NAME = "profiles.log"

    def __init__(self, data_dir, retention_days: float = DEFAULT_RETENTION_DAYS):
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._path = self._dir / self.LOG_NAME
        self._lock = threading.Lock()
        self._records: list[PublishedRecord] = []
        self._by_digest: dict[bytes, int] = {}
        self.retention_days = retention_days
        self._replay()

    def _replay(self) -> None:
        if not self._path.exists():
            return
        data = self._path.read_bytes()
        records, good = _read_frames(data)
        if good < len(data):
            # torn tail from a crash mid-append: drop it
            with open(self._path, "r+b") as fh:
                fh.truncate(good)
        self._records = records
        self._by_digest = {
            hashlib.sha256(r.profile_bytes).digest(): r.record_id for r in records
        }

    @property
    def last_record_id(self) -> int:
        return self._records[-1].record_id if self._records else 0

    def publish(self, profile_bytes: bytes, now: int | None = None) -> int:
        """Validate, durably append, and return the record id.

        Re-publishing byte-identical content returns the original id.

        Raises:
            ProfileFormatError: bytes do not parse as a processed profile.
        """
        profile = parse_profile(profile_bytes)
        if not isinstance(profile, ProcessedProfile):
            raise ProfileFormatError(
                "only processed profiles may be published (raw scan profiles "
                "never leave a device)"
            )
        digest = hashlib.sha256(profile_bytes).digest()
        with self._lock:
            existing = self._by_digest.get(digest)
            if existing is not None:
                return existing
            record = PublishedRecord(
                record_id=self.last_record_id + 1,
                profile_bytes=profile_bytes,
                published_at=int(time.time()) if now is None else int(now),
            )
            with open(self._path, "ab") as fh:
                fh.write(_frame(record))
                fh.flush()
                os.fsync(fh.fileno())
            self._records.append(record)
            self._by_digest[digest] = record.record_id
            return record.record_id

    def fetch_since(
        self, last_record_id: int, now: int | None = None
    ) -> list[PublishedRecord]:
        """All unexpired records newer than the cursor, ascending by id."""
        if last_record_id < 0:
            raise ValueError("lastRecordId must be >= 0")
        now = int(time.time()) if now is None else int(now)
        horizon = now - self.retention_days * 86400
        with self._lock:
            snapshot = list(self._records)
        return [
            r for r in snapshot
            if r.record_id > last_record_id and r.published_at >= horizon
        ]


class _ExchangeHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass

    def _reply(self, status: int, body: bytes,
               content_type: str = "text/plain") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if urllib.parse.urlparse(self.path).path != "/v1/profiles":
            return self._reply(404, b"unknown endpoint\n")
        token = self.server.upload_token
        if token and self.headers.get(TOKEN_HEADER) != token:
            return self._reply(401, b"bad or missing upload token\n")
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length)
        except (ValueError, OSError):
            return self._reply(400, b"unreadable request body\n")
        try:
            record_id = self.server.store.publish(body)
        except ProfileFormatError as exc:
            return self._reply(400, f"rejected: {exc}\n".encode())
        except OSError as exc:
            return self._reply(500, f"storage failure: {exc}\n".encode())
        self._reply(200, f"{record_id}\n".encode("ascii"))

    def do_GET(self):
        url = urllib.parse.urlparse(self.path)
        if url.path != "/v1/profiles":
            return self._reply(404, b"unknown endpoint\n")
        params = urllib.parse.parse_qs(url.query)
        try:
            since = int(params.get("since", ["0"])[0])
            if since < 0:
                raise ValueError
        except ValueError:
            return self._reply(400, b"since must be a non-negative integer\n")
        body = b"".join(_frame(r) for r in self.server.store.fetch_since(since))
        self._reply(200, body, content_type="application/octet-stream")


class ExchangeServer(ThreadingHTTPServer):
    """HTTP front end over a ProfileStore.

    Set ``upload_token`` (or the WIFITRACE_UPLOAD_TOKEN environment variable
    when constructed via serve()) to require the token header on publishes.
    """

    daemon_threads = True

    def __init__(self, address: tuple[str, int], store: ProfileStore,
                 upload_token: str | None = None):
        super().__init__(address, _ExchangeHandler)
        self.store = store
        self.upload_token = upload_token

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"


def serve_in_thread(
    store: ProfileStore, host: str = "127.0.0.1", port: int = 0,
    upload_token: str | None = None,
) -> ExchangeServer:
    """Start a server on a background thread (port 0 picks a free port)."""
    server = ExchangeServer((host, port), store, upload_token)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


# --- client -----------------------------------------------------------------

def _request(
    url: str, data: bytes | None = None, headers: dict | None = None,
    timeout: float = 10.0, retries: int = 3, backoff: float = 0.2,
) -> bytes:
    last_error: Exception | None = None
    for attempt in range(retries):
        try:
            req = urllib.request.Request(url, data=data, headers=headers or {})
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return resp.read()
        except urllib.error.HTTPError as exc:
            # a definitive server answer: do not retry
            detail = exc.read().decode("utf-8", "replace").strip()
            raise ExchangeError(f"{exc.code}: {detail or exc.reason}") from None
        except (urllib.error.URLError, OSError, TimeoutError) as exc:
            last_error = exc
            if attempt + 1 < retries:
                time.sleep(backoff * (2 ** attempt))
    raise ExchangeError(f"cannot reach {url}: {last_error}") from None


def publish(endpoint: str, profile_bytes: bytes,
            upload_token: str | None = None, **request_kwargs) -> int:
    """Upload processed-profile bytes; returns the assigned record id."""
    headers = {"Content-Type": "application/octet-stream"}
    if upload_token:
        headers[TOKEN_HEADER] = upload_token
    body = _request(f"{endpoint}/v1/profiles", data=profile_bytes,
                    headers=headers, **request_kwargs)
    return int(body.strip())


def fetch_since(endpoint: str, last_record_id: int,
                **request_kwargs) -> list[PublishedRecord]:
    """Download all records newer than the cursor."""
    body = _request(f"{endpoint}/v1/profiles?since={int(last_record_id)}",
                    **request_kwargs)
    records, good = _read_frames(body)
    if good != len(body):
        raise ExchangeError("malformed frame in server response")
    return records


class SyncState:
    """Persistent fetch cursor; updated atomically, only after a successful
    match pass."""

    def __init__(self, state_dir):
        self._dir = Path(state_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._path = self._dir / "cursor"

    @property
    def last_record_id(self) -> int:
        try:
            return int(self._path.read_text().strip())
        except (FileNotFoundError, ValueError):
            return 0

    def advance(self, record_id: int) -> None:
        tmp = self._path.with_suffix(".tmp")
        tmp.write_text(f"{record_id}\n")
        os.replace(tmp, self._path)


def client_sync(
    state: SyncState,
    endpoint: str,
    user_profile: SignalProfile,
    cfg: DetectionConfig = DetectionConfig(),
    **request_kwargs,
) -> ContactReport:
    """One sync round: fetch new profiles, match locally, advance the cursor.

    Nothing from the user's profile is transmitted; the request carries only
    the cursor. On network failure the cursor is untouched and ExchangeError
    propagates. With no new records the report is empty and no matching runs.
    """
    records = fetch_since(endpoint, state.last_record_id, **request_kwargs)
    if not records:
        return ContactReport((), ())
    published = []
    for record in records:
        profile = parse_profile(record.profile_bytes)
        if not isinstance(profile, ProcessedProfile):
            raise ExchangeError(
                f"record {record.record_id} is not a processed profile"
            )
        published.append(profile)
    report = match_and_notify(user_profile, published, cfg)
    state.advance(max(r.record_id for r in records))
    return report
