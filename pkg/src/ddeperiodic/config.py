"""INI run configurations.

Sections and keys (all optional except [system] manifold and g):

    [system]   name, manifold, g, f, period, delay
    [region]   type (box | ball | everywhere), lo, hi, center, radius
    [window*]  type (ball), center | orbit, radius      (one section per W)
    [omega]    lo, hi, lambda_bound, norm_bound
    [flow]     x0, t1, lambda, history
    [periodic] lambda, guess
    [branch]   lambda_max, norm_max, ds0, ds_min, ds_max, lambda_vert_tol, n_vert, max_steps
    [solver]   steps, n_h, seeds_per_axis, tol

manifold is euclidean(k), sphere(k) or torus(R, rho).  Field expressions
use x1..xk, and for f also t and the delayed state y1..yk.  History
expressions (flow history, periodic guess) use t for theta.
"""
from __future__ import annotations

import configparser
import re

import numpy as np

from .branch import ContinuationControls
from .errors import ConfigError
from .expr import compile_vector
from .fields import PerturbationField, TangentField, tangentize, tangentize_perturbation
from .integrate import History, normalize_delay
from .manifold import EmbeddedManifold, Euclidean, Sphere, Torus2
from .poincare import map_h
from .regions import BallRegion, BoxRegion, Everywhere, HistoryBall, PairRegion
from .systems import System

KEYS = {
    "system": {"name", "manifold", "g", "f", "period", "delay"},
    "region": {"type", "lo", "hi", "center", "radius"},
    "window": {"type", "center", "orbit", "radius"},
    "omega": {"lo", "hi", "lambda_bound", "norm_bound"},
    "flow": {"x0", "t1", "lambda", "history"},
    "periodic": {"lambda", "guess"},
    "branch": {"lambda_max", "norm_max", "ds0", "ds_min", "ds_max", "lambda_vert_tol", "n_vert", "max_steps"},
    "solver": {"steps", "n_h", "seeds_per_axis", "tol"},
}
_MANIFOLD = re.compile(r"^\s*(euclidean|sphere|torus)\s*\(([^)]*)\)\s*$")


class _Source:
    """Raw text kept around to report line numbers."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, section: str, key: str | None = None) -> int | None:
        current = None
        for no, raw in enumerate(self.lines, 1):
            s = raw.strip()
            if s.startswith("[") and s.endswith("]"):
                current = s[1:-1].strip()
                if key is None and current == section:
                    return no
                continue
            if key is not None and current == section and re.match(rf"^{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
                return no
        return None


def _kind(section: str) -> str:
    return "window" if section.startswith("window") else section


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(",", " ").split()])
    except ValueError:
        raise ValueError(f"expected numbers, got {text!r}") from None


def _number(text: str) -> float:
    """Scalar value; arithmetic with pi is allowed, e.g. 2*pi."""
    return float(compile_vector(text, 0, time=False, components=1)()[0])


def _manifold(spec: str) -> EmbeddedManifold:
    m = _MANIFOLD.match(spec)
    if not m:
        raise ValueError(f"manifold must be euclidean(k), sphere(k) or torus(R, rho), got {spec!r}")
    kind, args = m.group(1), _floats(m.group(2)) if m.group(2).strip() else np.array([])
    if kind == "euclidean":
        return Euclidean(int(args[0]) if args.size else 1)
    if kind == "sphere":
        return Sphere(int(args[0]) if args.size else 3)
    return Torus2(*args) if args.size else Torus2()


def load_config(text: str) -> System:
    """Parse INI text into a System; ConfigError carries the offending line."""
    src = _Source(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key {exc.option!r} in [{exc.section}]", exc.lineno) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", exc.lineno) from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("cannot parse line", line) from None

    for section in parser.sections():
        kind = _kind(section)
        if kind not in KEYS:
            raise ConfigError(f"unknown section [{section}]", src.line_of(section))
        for key in parser[section]:
            if key not in KEYS[kind]:
                raise ConfigError(f"unknown key {key!r} in [{section}]", src.line_of(section, key))

    def get(section, key, default=None, cast=None):
        if not parser.has_option(section, key):
            return default
        raw = parser[section][key]
        try:
            return cast(raw) if cast else raw
        except (ValueError, ConfigError, TypeError, IndexError) as exc:
            raise ConfigError(f"[{section}] {key}: {exc}", src.line_of(section, key)) from None

    if not parser.has_section("system"):
        raise ConfigError("missing [system] section")
    if not parser.has_option("system", "manifold"):
        parser["system"]["manifold"] = "euclidean(1)"
    M = get("system", "manifold", cast=_manifold)
    k = M.ambient_dim
    period = get("system", "period", 1.0, _number)
    delay = get("system", "delay", 0.0, _number)
    if not period > 0:
        raise ConfigError("period must be positive", src.line_of("system", "period"))
    if delay < 0:
        raise ConfigError("delay must be non-negative", src.line_of("system", "delay"))
    g_text = get("system", "g")
    if g_text is None:
        raise ConfigError("[system] needs g", src.line_of("system"))
    g_fn = get("system", "g", cast=lambda s: compile_vector(s, k, time=False))
    g = TangentField(lambda p: g_fn(0.0, p), name=g_text)
    f_fn = get("system", "f", None, lambda s: compile_vector(s, k, delayed=True))
    if f_fn is None:
        zero = np.zeros(k)
        f = PerturbationField(lambda t, p, q: zero, period, delay, name="0")
    else:
        f = PerturbationField(lambda t, p, q: f_fn(t, p, q), period, delay, name=get("system", "f"))
    if not M.is_euclidean:
        g = tangentize(M, g)
        f = tangentize_perturbation(M, f)

    solver = dict(
        steps=get("solver", "steps", 200, int),
        n_h=get("solver", "n_h", 32, int),
        seeds_per_axis=get("solver", "seeds_per_axis", 16, int),
    )
    tol = get("solver", "tol", 1e-8, float)
    r = normalize_delay(delay, period)

    def vec(section, key, default=None):
        v = get(section, key, None, _floats)
        if v is None:
            return default
        if v.size == 1 and k > 1:
            v = np.full(k, v[0])
        if v.size != k:
            raise ConfigError(f"[{section}] {key}: expected {k} numbers", src.line_of(section, key))
        return v

    box = M.bounding_box if M.bounding_box is not None else (-np.full(k, 10.0), np.full(k, 10.0))
    rtype = get("region", "type", "box" if parser.has_option("region", "lo") else "everywhere")
    if rtype == "box":
        region = BoxRegion(vec("region", "lo", box[0]), vec("region", "hi", box[1]))
    elif rtype == "ball":
        region = BallRegion(vec("region", "center", np.zeros(k)), get("region", "radius", 1.0, _number))
    elif rtype == "everywhere":
        region = Everywhere(box)
    else:
        raise ConfigError(f"unknown region type {rtype!r}", src.line_of("region", "type"))

    windows = []
    for section in sorted(s for s in parser.sections() if _kind(s) == "window"):
        if get(section, "type", "ball") != "ball":
            raise ConfigError("only ball windows are supported", src.line_of(section, "type"))
        radius = get(section, "radius", 0.5, _number)
        orbit = vec(section, "orbit")
        if orbit is not None:
            ref = map_h(M, g, orbit, period, r, n_h=solver["n_h"], steps=solver["steps"])
        else:
            ref = History.constant(M, vec(section, "center", np.zeros(k)), r, solver["n_h"])
        windows.append(HistoryBall(ref, radius))

    omega = PairRegion((vec("omega", "lo", region.bbox[0]), vec("omega", "hi", region.bbox[1])),
                       lambda_bound=get("omega", "lambda_bound", np.inf, _number),
                       norm_bound=get("omega", "norm_bound", np.inf, _number))

    controls = ContinuationControls(
        lambda_max=get("branch", "lambda_max", 5.0, _number),
        norm_max=get("branch", "norm_max", 1e3, _number),
        ds0=get("branch", "ds0", 1e-2, float),
        ds_min=get("branch", "ds_min", 1e-6, float),
        ds_max=get("branch", "ds_max", 0.5, float),
        lambda_vert_tol=get("branch", "lambda_vert_tol", 1e-6, float),
        n_vert=get("branch", "n_vert", 5, int),
        max_steps=get("branch", "max_steps", 2000, int),
        tol=tol,
        steps=solver["steps"],
    )

    def history_fn(section, key):
        fn = get(section, key, None, lambda s: compile_vector(s, k))
        return None if fn is None else (lambda th: fn(th))

    x0 = vec("flow", "x0")
    if x0 is not None and not M.is_euclidean:
        x0 = M.project(x0)
    return System(
        name=get("system", "name", "config"),
        description=f"g = {g_text}",
        M=M, g=g, f=f, region=region, omega=omega,
        n_h=solver["n_h"], steps=solver["steps"], windows=tuple(windows),
        x0=x0, flow_t1=get("flow", "t1", None, _number),
        lam=get("periodic", "lambda", 0.0, _number), flow_lam=get("flow", "lambda", 0.0, _number),
        guess=history_fn("periodic", "guess"), initial=history_fn("flow", "history"),
        seeds_per_axis=solver["seeds_per_axis"], controls=controls,
    )


def load_config_file(path: str) -> System:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return load_config(text)
