"""Shared builders for the test suite."""

from __future__ import annotations

import http.server
import json
import threading

from vanplan.model import Instance, Params


def make_instance(dist, demand, params=None, coords=None, names=None) -> Instance:
    m = len(dist)
    names = names or ["Base"] + [f"P{i}" for i in range(1, m)]
    return Instance(
        names=names, dist=dist, demand=demand, coords=coords, params=params or Params()
    )


def random_instance(rng, n=None, max_leg=285, max_demand=15) -> Instance:
    """Random asymmetric instance; max_leg <= 285 keeps every township servable."""
    if n is None:
        n = rng.randint(1, 30)
    m = n + 1
    dist = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i != j:
                dist[i][j] = rng.randint(1, max_leg)
    demand = [0] + [rng.randint(0, max_demand) for _ in range(n)]
    return make_instance(dist, demand)


def metric_instance(rng, n=None, max_leg=285, max_demand=15) -> Instance:
    """Random instance whose matrix satisfies the triangle inequality.

    Starts from random asymmetric legs and takes the all-pairs shortest-path
    closure, which only shrinks legs (so reachability is preserved).
    """
    inst = random_instance(rng, n=n, max_leg=max_leg, max_demand=max_demand)
    m = inst.n + 1
    d = [list(row) for row in inst.dist]
    for k in range(m):
        for i in range(m):
            dik = d[i][k]
            for j in range(m):
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return Instance(names=inst.names, dist=d, demand=inst.demand, params=inst.params)


class MatrixStubServer:
    """Tiny local HTTP server answering {"durations": ...} for table requests."""

    def __init__(self, durations):
        payload = json.dumps({"durations": durations}).encode()

        class Handler(http.server.BaseHTTPRequestHandler):
            def _answer(self):
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def do_GET(self):
                self._answer()

            def do_POST(self):
                self.rfile.read(int(self.headers.get("Content-Length", 0)))
                self._answer()

            def log_message(self, *args):
                pass

        self._server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def __enter__(self):
        self._thread.start()
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)


# shape check for map exports, shared by several test files
GEOJSON_SCHEMA = {
    "type": "object",
    "required": ["type", "features"],
    "properties": {
        "type": {"const": "FeatureCollection"},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["type", "geometry", "properties"],
                "properties": {
                    "type": {"const": "Feature"},
                    "geometry": {
                        "type": "object",
                        "required": ["type", "coordinates"],
                        "properties": {
                            "type": {"enum": ["LineString", "Point"]},
                            "coordinates": {"type": "array"},
                        },
                    },
                    "properties": {"type": "object"},
                },
            },
        },
    },
}
