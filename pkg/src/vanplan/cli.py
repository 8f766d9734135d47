"""Command line client for the planning service.

Commands marshal local JSON files into service requests.  By default they
run against an in-process copy of the service; pass --server http://host:port
to drive a remote one.  Exit codes: 0 success/valid, 1 usage error,
2 infeasible instance, 3 invalid schedule, 4 I/O or network error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from . import io as vio


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems become exit code 1, not argparse's 2
        raise _ArgError(message)


def _client(server):
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    import warnings

    with warnings.catch_warnings():
        # starlette prefers its httpx2 client and warns on plain httpx,
        # which is the one this package ships with
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


def _read_json(path):
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise vio.ParseError(f"{path}: {e}") from None


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _load_config(path):
    cfg = _read_json(path)
    if not isinstance(cfg, dict) or set(cfg) - set(vio.PARAM_KEYS):
        raise vio.SchemaError(f"{path}: config may only set {', '.join(vio.PARAM_KEYS)}")
    return cfg


def _apply_config(doc, config_path):
    if not config_path:
        return doc
    cfg = _load_config(config_path)
    if not isinstance(doc, dict):
        raise vio.SchemaError("instance document must be a JSON object")
    params = dict(doc.get("params") or {})
    params.update(cfg)
    out = dict(doc)
    out["params"] = params
    return out


def _error_exit(resp) -> int:
    code = None
    message = f"service answered HTTP {resp.status_code}"
    try:
        detail = resp.json().get("detail")
    except ValueError:
        detail = None
    if isinstance(detail, dict):
        code = detail.get("code")
        message = detail.get("message", message)
        if code == "infeasible" and detail.get("townships"):
            message += f" (townships {detail['townships']})"
    elif detail is not None:
        message = json.dumps(detail)
    print(f"error: {message}", file=sys.stderr)
    if code == "infeasible":
        return 2
    if code == "invalid-schedule":
        return 3
    return 4


def cmd_gen(args) -> int:
    payload = {"n": args.n, "seed": args.seed}
    if args.births is not None:
        payload["births_range"] = list(args.births)
    if args.config:
        payload["params"] = _load_config(args.config)
    with _client(args.server) as client:
        resp = client.post("/instances/generate", json=payload)
    if resp.status_code != 200:
        return _error_exit(resp)
    _write_text(args.output, vio.dumps_canonical(resp.json()))
    print(f"wrote {args.output}")
    return 0


def cmd_solve(args) -> int:
    doc = _apply_config(_read_json(args.instance), args.config)
    payload = {
        "instance": doc,
        "algo": args.algo,
        "seed": args.seed,
        "time_limit": args.time,
        "threads": args.threads,
        "strategy": args.strategy,
        "score_mode": args.score_mode,
        "keep_percent": args.keep_percent,
        "difference_factor": args.difference_factor,
        "min_exams_per_stop": args.min_exams,
        "sa_runs": args.sa_runs,
        "sa_iterations": args.sa_iterations,
        "mu": args.mu,
        "lambda": args.lam,
        "cx_prob": args.cx_prob,
        "mut_prob": args.mut_prob,
    }
    if args.restarts is not None:
        payload["restarts"] = args.restarts
    if args.generations is not None:
        payload["generations"] = args.generations
    with _client(args.server) as client:
        resp = client.post("/solve", json=payload)
        if resp.status_code != 200:
            return _error_exit(resp)
        body = resp.json()
        if args.output:
            _write_text(args.output, vio.dumps_canonical(body["schedule"]))
        if args.text:
            t = client.post(
                "/export/text", json={"instance": doc, "schedule": body["schedule"]}
            )
            if t.status_code != 200:
                return _error_exit(t)
            _write_text(args.text, t.text)
    s = body["summary"]
    print(
        f"tours={s['tours']} vans={s['vans']} travel={s['travel_minutes']} "
        f"exam={s['exam_minutes']} total={s['total_minutes']}"
    )
    return 0


def cmd_validate(args) -> int:
    doc = _apply_config(_read_json(args.instance), args.config)
    sched = _read_json(args.schedule)
    with _client(args.server) as client:
        resp = client.post("/validate", json={"instance": doc, "schedule": sched})
    if resp.status_code != 200:
        return _error_exit(resp)
    body = resp.json()
    if body["valid"]:
        print("schedule is valid")
        return 0
    for v in body["violations"]:
        where = f" (tour {v['tour_index']})" if v.get("tour_index") is not None else ""
        print(f"{v['kind']}{where}: {v['detail']}")
    print(f"{len(body['violations'])} violations")
    return 3


def cmd_compare(args) -> int:
    if len(args.schedules) != 2:
        raise _ArgError("compare needs exactly two -s/--schedule files")
    doc = _apply_config(_read_json(args.instance), args.config)
    a = _read_json(args.schedules[0])
    b = _read_json(args.schedules[1])
    with _client(args.server) as client:
        resp = client.post("/compare", json={"instance": doc, "a": a, "b": b})
    if resp.status_code != 200:
        return _error_exit(resp)
    body = resp.json()
    for name in ("a", "b"):
        t = body[name]
        print(f"{name}: tours={t['tours']} total={t['total_minutes']} vans={t['vans']}")
    if body["order"] == 0:
        print("result: tie")
    else:
        print(f"result: {body['better']} is better")
    return 0


def cmd_export(args) -> int:
    doc = _apply_config(_read_json(args.instance), args.config)
    sched = _read_json(args.schedule)
    path = "/export/geojson" if args.format == "geojson" else "/export/html"
    with _client(args.server) as client:
        resp = client.post(path, json={"instance": doc, "schedule": sched})
    if resp.status_code != 200:
        return _error_exit(resp)
    if args.format == "geojson":
        _write_text(args.output, vio.dumps_canonical(resp.json()))
    else:
        _write_text(args.output, resp.text)
    print(f"wrote {args.output}")
    return 0


def cmd_fetch_matrix(args) -> int:
    doc = _read_json(args.coords)
    if not isinstance(doc, dict) or not isinstance(doc.get("coords"), list):
        raise vio.SchemaError(f"{args.coords}: expected an object with a coords list")
    payload = {"endpoint": args.endpoint, "coords": doc["coords"]}
    for key in ("names", "demand", "yearly_untested_births"):
        if key in doc:
            payload[key] = doc[key]
    with _client(args.server) as client:
        resp = client.post("/fetch-matrix", json=payload)
    if resp.status_code != 200:
        return _error_exit(resp)
    _write_text(args.output, vio.dumps_canonical(resp.json()))
    print(f"wrote {args.output}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _births(text):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected lo:hi")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo:hi") from None
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vanplan", description="Plan monthly examination-van tours.")
    p.add_argument("--server", help="URL of a running service (default: in-process)")
    sub = p.add_subparsers(dest="cmd")

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--n", type=int, required=True, help="number of townships")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--births", type=_births, metavar="LO:HI", help="yearly untested births range")
    g.add_argument("--config", help="JSON file overriding exam_duration/max_day/working_days")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="plan a month for an instance")
    s.add_argument("-i", "--instance", required=True)
    s.add_argument("--algo", choices=["heuristic", "genetic"], default="heuristic")
    s.add_argument("--time", type=float, default=10.0, help="time budget in seconds")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config", help="JSON file overriding instance params")
    s.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    s.add_argument(
        "--strategy",
        choices=["furthest_first", "closest_first", "most_relevant_first", "random"],
        default="furthest_first",
    )
    s.add_argument("--score-mode", choices=["ratio", "difference"], default="ratio")
    s.add_argument("--keep-percent", type=float, default=0.20)
    s.add_argument("--difference-factor", type=float, default=60.0)
    s.add_argument("--min-exams", type=int, default=2)
    s.add_argument("--restarts", type=int, help="fixed restart count (overrides --time)")
    s.add_argument("--sa-runs", type=int, default=8)
    s.add_argument("--sa-iterations", type=int, default=200000)
    s.add_argument("--mu", type=int, default=150)
    s.add_argument("--lambda", dest="lam", type=int, default=300)
    s.add_argument("--cx-prob", type=float, default=0.6)
    s.add_argument("--mut-prob", type=float, default=0.2)
    s.add_argument("--generations", type=int, help="fixed generation count (overrides --time)")
    s.add_argument("-o", "--output", help="write the schedule JSON here")
    s.add_argument("--text", help="also write the readable month plan here")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("validate", help="check a schedule against an instance")
    v.add_argument("-i", "--instance", required=True)
    v.add_argument("-s", "--schedule", required=True)
    v.add_argument("--config", help="JSON file overriding instance params")
    v.set_defaults(fn=cmd_validate)

    c = sub.add_parser("compare", help="order two schedules for the same instance")
    c.add_argument("-i", "--instance", required=True)
    c.add_argument("-s", "--schedule", dest="schedules", action="append", required=True)
    c.add_argument("--config", help="JSON file overriding instance params")
    c.set_defaults(fn=cmd_compare)

    e = sub.add_parser("export", help="export a schedule as a map")
    e.add_argument("-i", "--instance", required=True)
    e.add_argument("-s", "--schedule", required=True)
    e.add_argument("--format", choices=["geojson", "html"], required=True)
    e.add_argument("--config", help="JSON file overriding instance params")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(fn=cmd_export)

    f = sub.add_parser("fetch-matrix", help="build an instance from a drive-time endpoint")
    f.add_argument("--endpoint", required=True, help="table endpoint URL")
    f.add_argument("--coords", required=True, help="JSON file with coords (and names/demand)")
    f.add_argument("-o", "--output", required=True)
    f.set_defaults(fn=cmd_fetch_matrix)

    r = sub.add_parser("serve", help="run the HTTP service")
    r.add_argument("--host", default="127.0.0.1")
    r.add_argument("--port", type=int, default=8000)
    r.set_defaults(fn=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _ArgError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    if getattr(args, "cmd", None) is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return args.fn(args)
    except _ArgError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except (vio.ParseError, vio.SchemaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except httpx.HTTPError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
