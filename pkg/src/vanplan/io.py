"""File formats, instance generation and the drive-time matrix fetcher.

The instance document is JSON with keys: names, dist_minutes, exactly one of
demand / yearly_untested_births, optional coords (lat, lon) and params.
Schedules serialize as {"tours": [{"stops", "exams"}...], "day_of", "van_of"}.
Both are written canonically (sorted keys, 2-space indent, trailing newline)
so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

import httpx

from .model import (
    BasicTour,
    Instance,
    InstanceError,
    Params,
    PlannedTour,
    Schedule,
    derive_monthly_demand,
    route_minutes,
)


class ParseError(ValueError):
    """A document is not valid JSON."""


class SchemaError(ValueError):
    """A document is JSON but not a valid instance/schedule."""


class NetworkError(RuntimeError):
    """The table endpoint could not be reached or answered an error."""


class MalformedResponse(RuntimeError):
    """The table endpoint answered something that is not a duration matrix."""


class MissingCoordinates(ValueError):
    """Map export requested for an instance without coordinates."""


PARAM_KEYS = ("exam_duration", "max_day", "working_days")


def instance_from_mapping(data) -> Instance:
    """Build an Instance from a decoded JSON document, naming what is wrong."""
    if not isinstance(data, dict):
        raise SchemaError("instance document must be a JSON object")
    names = data.get("names")
    if not isinstance(names, list) or not all(isinstance(x, str) for x in names):
        raise SchemaError("names must be a list of strings")
    dist = data.get("dist_minutes")
    if not isinstance(dist, list) or not all(isinstance(r, list) for r in dist):
        raise SchemaError("dist_minutes must be a list of rows")
    demand = data.get("demand")
    births = data.get("yearly_untested_births")
    if (demand is None) == (births is None):
        raise SchemaError("exactly one of demand / yearly_untested_births is required")
    if demand is None:
        if (
            not isinstance(births, list)
            or not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in births)
        ):
            raise SchemaError("yearly_untested_births must be a list of non-negative integers")
        demand = [derive_monthly_demand(b) for b in births]
        if demand:
            demand[0] = 0  # index 0 is the depot
    coords = data.get("coords")
    if coords is not None:
        if not isinstance(coords, list) or not all(
            isinstance(c, list)
            and len(c) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in c)
            for c in coords
        ):
            raise SchemaError("coords must be a list of [lat, lon] pairs")
        coords = [tuple(float(v) for v in c) for c in coords]
    raw_params = data.get("params")
    if raw_params is None:
        params = Params()
    else:
        if not isinstance(raw_params, dict):
            raise SchemaError("params must be an object")
        unknown = set(raw_params) - set(PARAM_KEYS)
        if unknown:
            raise SchemaError(f"unknown params keys: {sorted(unknown)}")
        try:
            params = Params(**{k: raw_params[k] for k in PARAM_KEYS if k in raw_params})
        except InstanceError as e:
            raise SchemaError(str(e)) from None
    try:
        return Instance(names=names, dist=dist, demand=demand, coords=coords, params=params)
    except InstanceError as e:
        raise SchemaError(str(e)) from None


def instance_to_mapping(instance: Instance) -> dict:
    out = {
        "names": list(instance.names),
        "demand": list(instance.demand),
        "dist_minutes": [list(row) for row in instance.dist],
        "params": {
            "exam_duration": instance.params.exam_duration,
            "max_day": instance.params.max_day,
            "working_days": instance.params.working_days,
        },
    }
    if instance.coords is not None:
        out["coords"] = [list(c) for c in instance.coords]
    return out


def dumps_canonical(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e}") from None
    try:
        return instance_from_mapping(data)
    except SchemaError as e:
        raise SchemaError(f"{path}: {e}") from None


def write_instance(instance: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_canonical(instance_to_mapping(instance)))


def schedule_to_mapping(s: Schedule) -> dict:
    return {
        "tours": [
            {"stops": list(pt.tour.stops), "exams": list(pt.exams)} for pt in s.tours
        ],
        "day_of": list(s.day_of),
        "van_of": list(s.van_of),
    }


def schedule_from_mapping(data) -> Schedule:
    if not isinstance(data, dict):
        raise SchemaError("schedule document must be a JSON object")
    raw = data.get("tours")
    day_of = data.get("day_of")
    van_of = data.get("van_of")
    if not isinstance(raw, list) or not isinstance(day_of, list) or not isinstance(van_of, list):
        raise SchemaError("schedule needs tours, day_of and van_of lists")
    tours = []
    for k, t in enumerate(raw):
        if not isinstance(t, dict) or not isinstance(t.get("stops"), list) or not isinstance(t.get("exams"), list):
            raise SchemaError(f"tour {k} needs stops and exams lists")
        try:
            tours.append(PlannedTour(BasicTour(tuple(t["stops"])), tuple(t["exams"])))
        except InstanceError as e:
            raise SchemaError(f"tour {k}: {e}") from None
    try:
        return Schedule(tuple(tours), tuple(day_of), tuple(van_of))
    except InstanceError as e:
        raise SchemaError(str(e)) from None


def load_schedule(path) -> Schedule:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"{path}: {e}") from None
    try:
        return schedule_from_mapping(data)
    except SchemaError as e:
        raise SchemaError(f"{path}: {e}") from None


def write_schedule_json(s: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps_canonical(schedule_to_mapping(s)))


@dataclass(frozen=True)
class GenSpec:
    """Recipe for a synthetic instance: n townships around a depot."""

    n: int
    seed: int = 0
    births_range: tuple[int, int] = (4, 16)
    speed: float = 120.0  # drive minutes per coordinate degree
    box: tuple[float, float, float, float] = (47.0, 27.0, 47.6, 28.0)  # lat/lon bounds
    params: Params = field(default_factory=Params)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("n must be at least 1")
        lo, hi = self.births_range
        if not 0 <= lo <= hi:
            raise InstanceError("births_range must satisfy 0 <= lo <= hi")
        if self.speed <= 0:
            raise InstanceError("speed must be positive")
        lat0, lon0, lat1, lon1 = self.box
        if not (lat0 < lat1 and lon0 < lon1):
            raise InstanceError("box must be (lat_min, lon_min, lat_max, lon_max)")


def generate_instance(gen: GenSpec) -> Instance:
    """Random but always-solvable instance.

    Distances start from the Euclidean point layout rounded up (so the
    symmetric base keeps the triangle inequality), get a per-direction factor
    in [1.0, 1.2], and are then clamped so every township's round trip plus
    one examination fits in a day.  Draw order (points, factors, births) is
    fixed, so one seed always yields the same instance.
    """
    rng = random.Random(gen.seed)
    lat0, lon0, lat1, lon1 = gen.box
    m = gen.n + 1
    pts = [
        (rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))
        for _ in range(m)
    ]
    base = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            d = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
            base[i][j] = base[j][i] = math.ceil(gen.speed * d)
    dist = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i != j:
                dist[i][j] = math.ceil(base[i][j] * (1.0 + 0.2 * rng.random()))
    budget = gen.params.max_day - gen.params.exam_duration
    for i in range(1, m):
        rt = dist[0][i] + dist[i][0]
        if rt > budget:
            dist[0][i] = dist[0][i] * budget // rt
            dist[i][0] = dist[i][0] * budget // rt
    lo, hi = gen.births_range
    demand = [0] + [derive_monthly_demand(rng.randint(lo, hi)) for _ in range(gen.n)]
    names = ["Depot"] + [f"T{i:03d}" for i in range(1, m)]
    return Instance(names=names, dist=dist, demand=demand, coords=pts, params=gen.params)


def write_schedule_text(s: Schedule, instance: Instance) -> str:
    """Pretty month plan, one block per tour, all working days listed."""
    params = instance.params
    ed = params.exam_duration
    by_day: dict[int, list[tuple[int, int]]] = {}
    for k in range(len(s.tours)):
        by_day.setdefault(s.day_of[k], []).append((s.van_of[k], k))
    lines = []
    for day in range(1, params.working_days + 1):
        lines.append(f"Day {day}")
        for van, k in sorted(by_day.get(day, [])):
            pt = s.tours[k]
            drive = route_minutes(pt.tour.stops, instance.dist)
            exam = ed * sum(pt.exams)
            lines.append(
                f"Day {day} Van {van} Tour {k + 1}: "
                f"drive={drive} exam={exam} total={drive + exam}"
            )
            for j, stop in enumerate(pt.tour.stops):
                lines.append(f"  {instance.names[stop]}: {pt.exams[j]} examinations")
    return "\n".join(lines) + "\n"


def _tour_groups(obj):
    # unify Schedule and plain tour pools: [(stops, exams or None, uses)]
    if isinstance(obj, Schedule):
        groups: dict[tuple[int, ...], list] = {}
        order = []
        for pt in obj.tours:
            key = pt.tour.stops
            if key not in groups:
                groups[key] = [list(pt.exams), 1]
                order.append(key)
            else:
                acc = groups[key]
                acc[0] = [a + b for a, b in zip(acc[0], pt.exams)]
                acc[1] += 1
        return [(key, groups[key][0], groups[key][1]) for key in order]
    return [(t.stops, None, 1) for t in obj]


def export_geojson(obj, instance: Instance) -> dict:
    """GeoJSON FeatureCollection: one LineString per distinct tour, one Point
    per township.  Coordinates are [lon, lat] order.  Accepts a Schedule or a
    list of tours (a pool)."""
    if instance.coords is None:
        raise MissingCoordinates("instance has no coordinates to export")
    coords = instance.coords
    features = []
    for k, (stops, exams, uses) in enumerate(_tour_groups(obj), start=1):
        ring = [[coords[0][1], coords[0][0]]]
        ring += [[coords[s][1], coords[s][0]] for s in stops]
        ring.append([coords[0][1], coords[0][0]])
        props = {
            "tour": k,
            "drive_minutes": route_minutes(stops, instance.dist),
            "stops": [instance.names[s] for s in stops],
        }
        if exams is not None:
            props["exams"] = list(exams)
            props["uses"] = uses
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": ring},
                "properties": props,
            }
        )
    for i in range(1, instance.n + 1):
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [coords[i][1], coords[i][0]],
                },
                "properties": {"name": instance.names[i], "demand": instance.demand[i]},
            }
        )
    return {"type": "FeatureCollection", "features": features}


_HTML_PAGE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Van tour map</title>
<style>
body {{ font-family: sans-serif; margin: 1em; }}
#tours button {{ margin: 2px; }}
#tours button.on {{ background: #246; color: #fff; }}
canvas {{ border: 1px solid #999; margin-top: 8px; }}
</style>
</head>
<body>
<h1>Van tours</h1>
<div id="tours"></div>
<canvas id="map" width="760" height="560"></canvas>
<script>
var GJ = {payload};
var lines = GJ.features.filter(function (f) {{ return f.geometry.type === "LineString"; }});
var points = GJ.features.filter(function (f) {{ return f.geometry.type === "Point"; }});
var selected = -1;
var all = [];
lines.forEach(function (f) {{ all = all.concat(f.geometry.coordinates); }});
points.forEach(function (f) {{ all.push(f.geometry.coordinates); }});
var xs = all.map(function (c) {{ return c[0]; }});
var ys = all.map(function (c) {{ return c[1]; }});
var x0 = Math.min.apply(null, xs), x1 = Math.max.apply(null, xs);
var y0 = Math.min.apply(null, ys), y1 = Math.max.apply(null, ys);
function px(c) {{
  var w = 720, h = 520, sx = (x1 > x0) ? w / (x1 - x0) : 1, sy = (y1 > y0) ? h / (y1 - y0) : 1;
  var s = Math.min(sx, sy);
  return [20 + (c[0] - x0) * s, 540 - (c[1] - y0) * s];
}}
function draw() {{
  var ctx = document.getElementById("map").getContext("2d");
  ctx.clearRect(0, 0, 760, 560);
  lines.forEach(function (f, i) {{
    ctx.strokeStyle = (i === selected || selected < 0) ? "#246" : "#ccc";
    ctx.lineWidth = (i === selected) ? 2.5 : 1;
    ctx.beginPath();
    f.geometry.coordinates.forEach(function (c, k) {{
      var p = px(c);
      if (k === 0) ctx.moveTo(p[0], p[1]); else ctx.lineTo(p[0], p[1]);
    }});
    ctx.stroke();
  }});
  points.forEach(function (f) {{
    var p = px(f.geometry.coordinates);
    ctx.fillStyle = "#a33";
    ctx.beginPath();
    ctx.arc(p[0], p[1], 3, 0, 2 * Math.PI);
    ctx.fill();
  }});
}}
var box = document.getElementById("tours");
lines.forEach(function (f, i) {{
  var b = document.createElement("button");
  b.textContent = "Tour " + f.properties.tour + " (" + f.properties.drive_minutes + " min)";
  b.onclick = function () {{
    selected = (selected === i) ? -1 : i;
    Array.prototype.forEach.call(box.children, function (c, k) {{
      c.className = (k === selected) ? "on" : "";
    }});
    draw();
  }};
  box.appendChild(b);
}});
draw();
</script>
</body>
</html>
"""


def export_html(obj, instance: Instance) -> str:
    """Self-contained interactive map page; byte-identical for identical input."""
    gj = export_geojson(obj, instance)
    return _HTML_PAGE.format(payload=json.dumps(gj, sort_keys=True))


def fetch_distance_matrix(endpoint: str, coords, client: httpx.Client | None = None) -> list:
    """Drive-time matrix from a table endpoint, rounded up to whole minutes.

    The endpoint must answer {"durations": [[seconds]]}.  If the URL contains
    the literal "{coords}" it is GET with "lon,lat;lon,lat..." substituted,
    otherwise it is POST with JSON {"coordinates": [[lat, lon], ...]}.
    """
    own = client is None
    if own:
        client = httpx.Client(timeout=30.0)
    try:
        try:
            if "{coords}" in endpoint:
                path = ";".join(f"{lon:.6f},{lat:.6f}" for lat, lon in coords)
                resp = client.get(endpoint.replace("{coords}", path))
            else:
                resp = client.post(
                    endpoint, json={"coordinates": [[lat, lon] for lat, lon in coords]}
                )
        except httpx.HTTPError as e:
            raise NetworkError(f"table request failed: {e}") from None
    finally:
        if own:
            client.close()
    if resp.status_code != 200:
        raise NetworkError(f"table endpoint answered HTTP {resp.status_code}")
    try:
        data = resp.json()
    except ValueError:
        raise MalformedResponse("table response is not JSON") from None
    durations = data.get("durations") if isinstance(data, dict) else None
    m = len(coords)
    if (
        not isinstance(durations, list)
        or len(durations) != m
        or any(not isinstance(row, list) or len(row) != m for row in durations)
    ):
        raise MalformedResponse(f"durations must be a {m}x{m} matrix")
    out = []
    for i, row in enumerate(durations):
        line = []
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
                raise MalformedResponse(f"durations[{i}][{j}] is not a non-negative number")
            line.append(0 if i == j else math.ceil(v / 60.0))
        out.append(line)
    return out
