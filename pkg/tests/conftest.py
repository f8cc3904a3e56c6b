import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

FIXTURES_DIR = Path(__file__).parent / "fixtures"
HTML_DIR = FIXTURES_DIR / "html"

OK_PAGE = b"""<html><head>
<meta property="og:title" content="Fixture Page">
<meta property="og:site_name" content="Fixture Site">
</head><body>ok</body></html>
"""


class FixtureHandler(BaseHTTPRequestHandler):
    """Small fixture origin: serves the golden HTML corpus plus endpoints
    for redirect, slow, oversized, and non-HTML behavior."""

    server_version = "FixtureHTTP/1.0"
    protocol_version = "HTTP/1.1"

    def log_message(self, *args):  # keep pytest output clean
        pass

    def _send(self, status: int, body: bytes, content_type="text/html; charset=utf-8", headers=()):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for key, value in headers:
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/ok.html":
            self._send(200, OK_PAGE)
        elif self.path.startswith("/html/"):
            target = HTML_DIR / self.path[len("/html/"):]
            if target.is_file():
                self._send(200, target.read_bytes())
            else:
                self._send(404, b"missing")
        elif self.path == "/redirect-once":
            self._send(301, b"", headers=[("Location", "/ok.html")])
        elif self.path.startswith("/redirect-chain/"):
            hops = int(self.path.rsplit("/", 1)[1])
            if hops <= 0:
                self._send(200, OK_PAGE)
            else:
                self._send(302, b"", headers=[("Location", f"/redirect-chain/{hops - 1}")])
        elif self.path == "/slow":
            time.sleep(5)
            self._send(200, OK_PAGE)
        elif self.path.startswith("/big/"):
            size = int(self.path.rsplit("/", 1)[1])
            self._send(200, b"<html>" + b"a" * size + b"</html>")
        elif self.path == "/pdf":
            self._send(200, b"%PDF-1.4 not really", content_type="application/pdf")
        elif self.path == "/no-content-type":
            body = b"<html><head><title>Untyped</title></head></html>"
            self.send_response(200)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
        else:
            self._send(404, b"missing")


@pytest.fixture(scope="session")
def fixture_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), FixtureHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()
    thread.join(timeout=5)


# -- acceptance reporting ------------------------------------------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in str(item.fspath):
        _ACCEPTANCE_RESULTS[item.name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"[{verdict}] {name}")
