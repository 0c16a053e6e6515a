"""Scenario and sweep document intake, normalization, and digests.

Documents are JSON.  Validation is strict: unknown keys are fatal (with
a nearest-key suggestion), and every error message names the offending
key path.  A scenario's digest is the SHA-256 of its canonicalized
normalized document -- sorted keys, no insignificant whitespace,
shortest round-trip numbers, defaults materialized -- so reformatting or
reordering a file never changes the digest, while any value change does.
"""

from __future__ import annotations

import difflib
import hashlib
import json

from .analysis import SweepDimension, SweepSpec
from .engine import NO_CHURN, Scenario
from .errors import ConfigurationError
from .interventions import (
    INTERVENTION_KINDS,
    EventSchedule,
    ExpectationManagement,
    Intervention,
    NoveltyReset,
    Personalization,
    SocialBenchmark,
    StrategicDip,
)
from .kernels import BassParams, ChurnParams, SatisfactionParams
from .population import Segment
from .schedule import SCHEDULE_KINDS, CapabilitySchedule, Release


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _require_object(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{path}: expected an object")
    return value


def _require_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigurationError(f"{path}: expected a list")
    return value


def _check_keys(obj: dict, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    known = required + optional
    for key in obj:
        if key not in known:
            hint = difflib.get_close_matches(str(key), known, n=1, cutoff=0.6)
            suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
            raise ConfigurationError(f"{path}.{key}: unknown key{suffix}")
    for key in required:
        if key not in obj:
            raise ConfigurationError(f"{path}.{key}: missing required key")


def _number(obj: dict, key: str, path: str) -> float:
    v = obj[key]
    if not _is_number(v):
        raise ConfigurationError(f"{path}.{key}: expected a number")
    return float(v)


def _integer(obj: dict, key: str, path: str) -> int:
    v = obj[key]
    if not _is_int(v):
        raise ConfigurationError(f"{path}.{key}: expected an integer")
    return v


def _string(obj: dict, key: str, path: str) -> str:
    v = obj[key]
    if not isinstance(v, str):
        raise ConfigurationError(f"{path}.{key}: expected a string")
    return v


def _rewrap(path: str):
    """Context manager re-raising ConfigurationError with a path prefix."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is ConfigurationError:
                raise ConfigurationError(f"{path}: {exc}") from None
            return False

    return _Ctx()


def _parse_event(obj, path: str) -> EventSchedule:
    obj = _require_object(obj, path)
    _check_keys(obj, path, (), ("at", "start", "period"))
    kwargs = {}
    for key in ("at", "start", "period"):
        if key in obj:
            kwargs[key] = _integer(obj, key, path)
    with _rewrap(path):
        return EventSchedule(**kwargs)


def _parse_intervention(obj, path: str) -> Intervention:
    obj = _require_object(obj, path)
    if "kind" not in obj:
        raise ConfigurationError(f"{path}.kind: missing required key")
    kind = _string(obj, "kind", path)
    if kind not in INTERVENTION_KINDS:
        hint = difflib.get_close_matches(kind, INTERVENTION_KINDS, n=1, cutoff=0.6)
        suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
        raise ConfigurationError(f"{path}.kind: unknown intervention {kind!r}{suffix}")
    params = {
        "novelty_reset": ("rho", "decay_delta"),
        "personalization": ("max_log_mult", "gamma_damp_omega"),
        "expectation_management": ("weight_w", "announce_discount_a"),
        "social_benchmark": ("beta0", "tau"),
        "strategic_dip": ("depth", "duration"),
    }[kind]
    _check_keys(obj, path, ("kind", "schedule") + params)
    event = _parse_event(obj["schedule"], f"{path}.schedule")
    kwargs = {}
    for key in params:
        kwargs[key] = (
            _integer(obj, key, path) if key == "duration" else _number(obj, key, path)
        )
    with _rewrap(path):
        return INTERVENTION_KINDS[kind](schedule=event, **kwargs)


def _parse_schedule(obj, path: str) -> CapabilitySchedule:
    obj = _require_object(obj, path)
    if "kind" not in obj:
        raise ConfigurationError(f"{path}.kind: missing required key")
    kind = _string(obj, "kind", path)
    if kind not in SCHEDULE_KINDS:
        hint = difflib.get_close_matches(kind, SCHEDULE_KINDS, n=1, cutoff=0.6)
        suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
        raise ConfigurationError(f"{path}.kind: unknown schedule kind {kind!r}{suffix}")
    keys = {
        "continuous": ("kind", "c0", "resource_growth", "alpha"),
        "punctuated": ("kind", "c0", "releases"),
        "hybrid": ("kind", "c0", "resource_growth", "alpha", "releases"),
        "table": ("kind", "values"),
    }[kind]
    _check_keys(obj, path, keys)
    kwargs: dict = {"kind": kind}
    if kind == "table":
        values = _require_list(obj["values"], f"{path}.values")
        for i, v in enumerate(values):
            if not _is_number(v):
                raise ConfigurationError(f"{path}.values[{i}]: expected a number")
        kwargs["values"] = tuple(float(v) for v in values)
    else:
        kwargs["c0"] = _number(obj, "c0", path)
    if kind in ("continuous", "hybrid"):
        kwargs["resource_growth"] = _number(obj, "resource_growth", path)
        kwargs["alpha"] = _number(obj, "alpha", path)
    if kind in ("punctuated", "hybrid"):
        releases = _require_list(obj["releases"], f"{path}.releases")
        parsed = []
        for i, rel in enumerate(releases):
            rpath = f"{path}.releases[{i}]"
            rel = _require_object(rel, rpath)
            _check_keys(rel, rpath, ("time", "log_jump"))
            with _rewrap(rpath):
                parsed.append(Release(time=_integer(rel, "time", rpath), log_jump=_number(rel, "log_jump", rpath)))
        kwargs["releases"] = tuple(parsed)
    with _rewrap(path):
        return CapabilitySchedule(**kwargs)


def _parse_segment(obj, path: str) -> Segment:
    obj = _require_object(obj, path)
    _check_keys(
        obj,
        path,
        ("name", "fraction", "gamma_range", "bass"),
        ("initial_headroom", "headroom_jitter"),
    )
    gr = _require_list(obj["gamma_range"], f"{path}.gamma_range")
    if len(gr) != 2 or not all(_is_number(v) for v in gr):
        raise ConfigurationError(f"{path}.gamma_range: expected [lo, hi] numbers")
    bpath = f"{path}.bass"
    bass = _require_object(obj["bass"], bpath)
    _check_keys(bass, bpath, ("p", "q"))
    kwargs = {}
    for key in ("initial_headroom", "headroom_jitter"):
        if key in obj:
            kwargs[key] = _number(obj, key, path)
    with _rewrap(path):
        return Segment(
            name=_string(obj, "name", path),
            fraction=_number(obj, "fraction", path),
            gamma_range=(float(gr[0]), float(gr[1])),
            bass=BassParams(p=_number(bass, "p", bpath), q=_number(bass, "q", bpath)),
            **kwargs,
        )


def parse_scenario_document(document: dict) -> Scenario:
    """Validate a scenario document and build the runnable Scenario."""
    doc = _require_object(document, "scenario")
    _check_keys(
        doc,
        "scenario",
        ("horizon", "seed", "population", "schedule", "satisfaction"),
        ("churn", "interventions", "trace_agents"),
    )
    horizon = _integer(doc, "horizon", "scenario")
    seed = _integer(doc, "seed", "scenario")

    pop = _require_object(doc["population"], "population")
    _check_keys(pop, "population", ("size", "segments"))
    size = _integer(pop, "size", "population")
    seg_list = _require_list(pop["segments"], "population.segments")
    if not seg_list:
        raise ConfigurationError("population.segments: must be non-empty")
    segments = tuple(
        _parse_segment(seg, f"population.segments[{i}]") for i, seg in enumerate(seg_list)
    )
    total = sum(s.fraction for s in segments)
    if abs(total - 1.0) > 1e-9:
        raise ConfigurationError(
            f"population.segments[*].fraction: fractions sum to {total!r}, expected 1"
        )

    schedule = _parse_schedule(doc["schedule"], "schedule")

    spath = "satisfaction"
    sat = _require_object(doc["satisfaction"], spath)
    _check_keys(sat, spath, ("k", "b"), ("lambda",))
    sat_kwargs = {"k": _number(sat, "k", spath), "b": _number(sat, "b", spath)}
    if "lambda" in sat:
        sat_kwargs["loss_aversion"] = _number(sat, "lambda", spath)
    with _rewrap(spath):
        satisfaction = SatisfactionParams(**sat_kwargs)

    churn = NO_CHURN
    if "churn" in doc:
        cpath = "churn"
        cobj = _require_object(doc["churn"], cpath)
        _check_keys(cobj, cpath, ("s_churn", "eta", "cap"))
        with _rewrap(cpath):
            churn = ChurnParams(
                s_churn=_number(cobj, "s_churn", cpath),
                eta=_number(cobj, "eta", cpath),
                cap=_number(cobj, "cap", cpath),
            )

    interventions: tuple[Intervention, ...] = ()
    if "interventions" in doc:
        ivs = _require_list(doc["interventions"], "interventions")
        interventions = tuple(
            _parse_intervention(iv, f"interventions[{i}]") for i, iv in enumerate(ivs)
        )

    trace = False
    if "trace_agents" in doc:
        if not isinstance(doc["trace_agents"], bool):
            raise ConfigurationError("scenario.trace_agents: expected a boolean")
        trace = doc["trace_agents"]

    scenario = Scenario(
        horizon=horizon,
        population_size=size,
        segments=segments,
        schedule=schedule,
        satisfaction=satisfaction,
        churn=churn,
        interventions=interventions,
        seed=seed,
        trace_agents=trace,
    )
    with _rewrap("scenario"):
        scenario.validate()
    return scenario


def load_scenario(path) -> Scenario:
    """Read, parse, and fully validate a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: parse error: {exc}") from None
    return parse_scenario_document(document)


def _event_to_document(event: EventSchedule) -> dict:
    if event.at is not None:
        return {"at": event.at}
    return {"start": event.start, "period": event.period}


def _intervention_to_document(iv: Intervention) -> dict:
    doc: dict = {"kind": iv.kind, "schedule": _event_to_document(iv.schedule)}
    if isinstance(iv, NoveltyReset):
        doc.update(rho=iv.rho, decay_delta=iv.decay_delta)
    elif isinstance(iv, Personalization):
        doc.update(max_log_mult=iv.max_log_mult, gamma_damp_omega=iv.gamma_damp_omega)
    elif isinstance(iv, ExpectationManagement):
        doc.update(weight_w=iv.weight_w, announce_discount_a=iv.announce_discount_a)
    elif isinstance(iv, SocialBenchmark):
        doc.update(beta0=iv.beta0, tau=iv.tau)
    elif isinstance(iv, StrategicDip):
        doc.update(depth=iv.depth, duration=iv.duration)
    return doc


def scenario_to_document(scenario: Scenario) -> dict:
    """Normalized document form: every default materialized, floats as floats."""
    sched: dict = {"kind": scenario.schedule.kind}
    if scenario.schedule.kind == "table":
        sched["values"] = [float(v) for v in scenario.schedule.values]
    else:
        sched["c0"] = float(scenario.schedule.c0)
    if scenario.schedule.kind in ("continuous", "hybrid"):
        sched["resource_growth"] = float(scenario.schedule.resource_growth)
        sched["alpha"] = float(scenario.schedule.alpha)
    if scenario.schedule.kind in ("punctuated", "hybrid"):
        sched["releases"] = [
            {"time": r.time, "log_jump": float(r.log_jump)} for r in scenario.schedule.releases
        ]
    return {
        "horizon": scenario.horizon,
        "seed": scenario.seed,
        "trace_agents": scenario.trace_agents,
        "population": {
            "size": scenario.population_size,
            "segments": [
                {
                    "name": s.name,
                    "fraction": float(s.fraction),
                    "gamma_range": [float(s.gamma_range[0]), float(s.gamma_range[1])],
                    "bass": {"p": float(s.bass.p), "q": float(s.bass.q)},
                    "initial_headroom": float(s.initial_headroom),
                    "headroom_jitter": float(s.headroom_jitter),
                }
                for s in scenario.segments
            ],
        },
        "schedule": sched,
        "satisfaction": {
            "k": float(scenario.satisfaction.k),
            "b": float(scenario.satisfaction.b),
            "lambda": float(scenario.satisfaction.loss_aversion),
        },
        "churn": {
            "s_churn": float(scenario.churn.s_churn),
            "eta": float(scenario.churn.eta),
            "cap": float(scenario.churn.cap),
        },
        "interventions": [_intervention_to_document(iv) for iv in scenario.interventions],
    }


def canonical_json(document: dict) -> str:
    """Sorted keys, minimal separators, shortest round-trip numbers."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"), allow_nan=False)


def scenario_digest(scenario: Scenario) -> str:
    """SHA-256 over the canonicalized normalized document."""
    payload = canonical_json(scenario_to_document(scenario))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def parse_sweep_document(document: dict) -> SweepSpec:
    doc = _require_object(document, "sweep")
    _check_keys(doc, "sweep", ("samples", "seed", "metrics", "dimensions"))
    metrics = _require_list(doc["metrics"], "sweep.metrics")
    for i, m in enumerate(metrics):
        if not isinstance(m, str):
            raise ConfigurationError(f"sweep.metrics[{i}]: expected a string")
    dims = _require_list(doc["dimensions"], "sweep.dimensions")
    parsed_dims = []
    for i, dim in enumerate(dims):
        dpath = f"sweep.dimensions[{i}]"
        dim = _require_object(dim, dpath)
        _check_keys(dim, dpath, ("name", "lo", "hi", "paths"))
        paths = _require_list(dim["paths"], f"{dpath}.paths")
        parsed_paths = []
        for j, p in enumerate(paths):
            p = _require_list(p, f"{dpath}.paths[{j}]")
            for el in p:
                if not (isinstance(el, str) or _is_int(el)):
                    raise ConfigurationError(
                        f"{dpath}.paths[{j}]: path elements must be strings or integers"
                    )
            parsed_paths.append(tuple(p))
        with _rewrap(dpath):
            parsed_dims.append(
                SweepDimension(
                    name=_string(dim, "name", dpath),
                    paths=tuple(parsed_paths),
                    lo=_number(dim, "lo", dpath),
                    hi=_number(dim, "hi", dpath),
                )
            )
    spec = SweepSpec(
        dimensions=tuple(parsed_dims),
        samples=_integer(doc, "samples", "sweep"),
        seed=_integer(doc, "seed", "sweep"),
        metrics=tuple(metrics),
    )
    with _rewrap("sweep"):
        spec.validate()
    return spec


def load_sweep_spec(path) -> SweepSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: parse error: {exc}") from None
    return parse_sweep_document(document)


def load_document(path) -> dict:
    """Raw JSON object from a file, for sweep base-document patching."""
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: parse error: {exc}") from None
    obj = _require_object(document, str(path))
    return obj
