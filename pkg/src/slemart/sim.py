"""Numerical SLE_kappa(rho) up to collision stopping times.

Paths are advanced together as numpy arrays, each with its own time step and
its own random stream, so a path's trajectory does not depend on which other
paths share its batch.  A step of size

    dt = min(dt_base, adaptivity * max(gap, eps)^2 / kappa)

(``gap`` the distance from the drive to the nearest point that enters the
drift or is the stop partner; points with zero exponent are tracers) is a
Brownian kick ``sqrt(kappa dt) xi`` followed by the deterministic flow:

* passive points follow the exact Loewner flow with the drive frozen,
  ``p -> X + sign(p - X) sqrt((p - X)^2 + 4 h)``;
* the drive moves by ``kappa d log Z h``;
* capacity coefficients follow their polynomial ODEs (RK4), and ``g_{-2}``
  is set to its exact value ``g_{-2} + 2 dt``.

The flow is sub-stepped (``h <= flow_adaptivity gap^2 / kappa``) only while a gap
is below ``eps``.  If the kick carries the drive over a passive point, that
point is mirrored back across the drive.  Several crossed points move as a
block, which also pushes any point it would overtake, so the gap reflects as
in the continuous process and the drive keeps its increment.  Jumping over
(or pushing) the stop partner is the collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .config import SleConfig, builtin_configs
from .poly import GradedPoly, NumericPoly
from .virasoro import coefficient_drift

__all__ = [
    "SimParams",
    "SimState",
    "StopRecord",
    "StopPredicate",
    "pair_gap",
    "triple_gap",
    "default_stop",
    "Dynamics",
    "NoiseStreams",
    "NumericalBlowupError",
    "SimulationTimeout",
    "step",
    "run_until_stop",
    "run_glued",
    "evaluate_observable",
    "Experiment",
    "single_experiment",
    "glued_experiment",
    "MonteCarloResult",
    "monte_carlo",
    "simulate_paths",
    "RUNNING",
    "STOPPED",
    "TIMEOUT",
    "BLOWUP",
]

RUNNING, STOPPED, TIMEOUT, BLOWUP = 0, 1, 2, 3
STATUS_NAMES = {RUNNING: "running", STOPPED: "collision", TIMEOUT: "timeout", BLOWUP: "blowup"}


class NumericalBlowupError(RuntimeError):
    """The drive jumped over a passive point and reflection did not repair it."""


class SimulationTimeout(RuntimeError):
    """``max_steps`` was exhausted before the stopping condition held."""


@dataclass(frozen=True)
class SimParams:
    dt_base: float = 1.0
    adaptivity: float = 0.0025
    flow_adaptivity: float = 0.1
    stop_epsilon: float = 1e-3
    w_offset: float | None = None
    depth: int = 2
    max_steps: int = 2_000_000
    seed: int = 0

    def __post_init__(self):
        for name in ("dt_base", "adaptivity", "flow_adaptivity", "stop_epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.w_offset is not None and not self.w_offset > 0:
            raise ValueError("w_offset must be positive")
        if self.depth < 2:
            raise ValueError("capacity depth must be at least 2")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def offset(self) -> float:
        return self.stop_epsilon if self.w_offset is None else self.w_offset

    def check_initial(self, positions: dict[str, float]) -> None:
        vals = sorted(positions.values())
        gaps = [b - a for a, b in zip(vals, vals[1:])]
        if gaps and min(gaps) <= 0:
            raise ValueError("initial points must be distinct")
        if gaps and self.stop_epsilon > min(gaps) / 100:
            raise ValueError(
                f"stop_epsilon={self.stop_epsilon} exceeds 1/100 of the smallest initial gap {min(gaps)}")


@dataclass(frozen=True)
class StopPredicate:
    kind: str
    names: tuple[str, ...]

    def __post_init__(self):
        if (self.kind, len(self.names)) not in (("pair", 2), ("triple", 3)):
            raise ValueError(f"bad stop predicate {self.kind}{self.names}")

    def gap(self, values: dict[str, np.ndarray]) -> np.ndarray:
        if self.kind == "pair":
            a, b = self.names
            return np.abs(values[a] - values[b])
        a, b, c = self.names
        return np.maximum(np.abs(values[a] - values[b]), np.abs(values[c] - values[b]))

    def partner(self, drive: str) -> str | None:
        """The point whose meeting with the drive is the stopping event."""
        ends = (self.names[0], self.names[-1])
        if drive in ends:
            return ends[1] if ends[0] == drive else ends[0]
        return None

    def __str__(self):
        fn = "pairGap" if self.kind == "pair" else "tripleGap"
        return f"{fn}({', '.join(self.names)})"


def pair_gap(a: str, b: str) -> StopPredicate:
    return StopPredicate("pair", (a, b))


def triple_gap(a: str, b: str, c: str) -> StopPredicate:
    return StopPredicate("triple", (a, b, c))


_DEFAULT_STOPS = {
    "reversibility": pair_gap("x", "y"),
    "reversibility-reversed": pair_gap("y", "x"),
    "duality": pair_gap("x", "u"),
    "star1": triple_gap("y*", "v*", "x*"),
    "star2": pair_gap("~y*", "~u*"),
}


def default_stop(cfg: SleConfig) -> StopPredicate:
    if cfg.name in _DEFAULT_STOPS and set(_DEFAULT_STOPS[cfg.name].names) <= set(cfg.names):
        return _DEFAULT_STOPS[cfg.name]
    if len(cfg.passive) == 1:
        return pair_gap(cfg.driving, cfg.passive[0])
    raise ValueError(f"config {cfg.name!r} needs an explicit stop predicate")


class Dynamics:
    """Numeric drift data for one configuration at a numeric base kappa.

    Symbolic coefficients live in Q(k) with ``k`` the base parameter, so they
    are specialised at ``base``; the diffusion uses ``kappa_eff``.
    """

    def __init__(self, cfg: SleConfig, base, depth: int):
        table = cfg.table(depth)
        self.name = cfg.name
        self.base = float(base)
        self.kappa = cfg.kappa.evalf(self.base)
        if not self.kappa > 0:
            raise ValueError(f"effective kappa {self.kappa} is not positive")
        self.drive = cfg.driving
        self.passive = cfg.passive
        self.depth = depth
        self.cap_names = table.cap_vars()
        self.log_drift = cfg.log_derivative(self.drive, table, at=Fraction(base)).compile(self.base)
        self.cap_drifts = [coefficient_drift(table, self.drive, m).compile(self.base)
                           for m in range(2, depth + 1)]
        # points that put a singular term into the drift; the others are tracers
        self.watch = tuple(k for k, p in enumerate(self.passive)
                           if cfg.exponent(self.drive, p).evalf(self.base) != 0)

    def values(self, X, P, G=None) -> dict:
        out = {self.drive: X}
        for k, name in enumerate(self.passive):
            out[name] = P[:, k]
        if G is not None:
            for k, name in enumerate(self.cap_names):
                out[name] = G[:, k]
        return out

    def drift(self, X, P) -> np.ndarray:
        return self.kappa * (self.log_drift(self.values(X, P)) + np.zeros_like(X))

    def cap_rate(self, X, G) -> np.ndarray:
        vals = {self.drive: X}
        for k, name in enumerate(self.cap_names):
            vals[name] = G[:, k]
        zero = np.zeros_like(X)
        return np.stack([b(vals) + zero for b in self.cap_drifts], axis=1)


class NoiseStreams:
    """One buffered standard-normal stream per path."""

    def __init__(self, generators, block: int = 256):
        self.gens = list(generators)
        self.block = block
        self.buf = np.empty((len(self.gens), block))
        self.ptr = np.full(len(self.gens), block, dtype=np.int64)

    @classmethod
    def for_paths(cls, seed: int, indices, block: int = 256) -> "NoiseStreams":
        gens = [np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(int(i),))))
                for i in indices]
        return cls(gens, block)

    def draw(self, rows: np.ndarray) -> np.ndarray:
        empty = rows[self.ptr[rows] >= self.block]
        for r in empty:
            self.buf[r] = self.gens[r].standard_normal(self.block)
            self.ptr[r] = 0
        out = self.buf[rows, self.ptr[rows]]
        self.ptr[rows] += 1
        return out


def _rk4(dyn: Dynamics, X, G, dt):
    h = dt[:, None]
    k1 = dyn.cap_rate(X, G)
    k2 = dyn.cap_rate(X, G + 0.5 * h * k1)
    k3 = dyn.cap_rate(X, G + 0.5 * h * k2)
    k4 = dyn.cap_rate(X, G + h * k3)
    out = G + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    out[:, 0] = G[:, 0] + 2 * dt
    return out


def _watched(dyn: Dynamics, partner: int) -> list[int]:
    return list(dyn.watch if partner < 0 or partner in dyn.watch else dyn.watch + (partner,))


def _flow(dyn: Dynamics, X, P, G, S, dt, watch, c, partner=-1, eps=0.0):
    """Deterministic part over ``dt``: drift, Loewner flow, coefficient ODEs.

    Sub-steps ``h <= c gap^2 / kappa`` only where a watched gap is small, so a
    drive sitting very close to a (net repelling) point is still resolved.
    A row leaves early once its partner gap is below ``eps``.  Returns the
    mask of rows where the drive crossed a point and the time actually used.
    """
    kappa = dyn.kappa
    rem = dt.copy()
    bad = np.zeros(X.shape, dtype=bool)
    rows = np.flatnonzero(rem > 0)
    while rows.size:
        x, p, g = X[rows], P[rows], G[rows]
        d = p - x[:, None]
        if watch:
            h = np.minimum(rem[rows], c * np.abs(d[:, watch]).min(axis=1) ** 2 / kappa)
        else:
            h = rem[rows]
        mu = dyn.drift(x, p)
        p = x[:, None] + S[rows] * np.sqrt(d * d + 4 * h[:, None])
        G[rows] = _rk4(dyn, x, g, h)
        x = x + mu * h
        bad[rows] |= (np.sign(p - x[:, None]) != S[rows]).any(axis=1)
        X[rows], P[rows] = x, p
        rem[rows] = np.where(h >= rem[rows], 0.0, rem[rows] - h)
        keep = (rem[rows] > 0) & ~bad[rows]
        if partner >= 0:
            keep &= np.abs(p[:, partner] - x) >= eps
        rows = rows[keep]
    return bad, dt - rem


def _one_step(dyn: Dynamics, X, P, G, S, params: SimParams, xi, t_cap=None, partner: int = -1, order=None):
    """One step for a batch: Brownian kick, then the deterministic flow.

    Returns ``(X, P, G, dt, reflected, blowup, collided)``.
    """
    kappa = dyn.kappa
    watch = _watched(dyn, partner)
    D = P - X[:, None]
    if watch:
        gmin = np.abs(D[:, watch]).min(axis=1)
    else:
        gmin = np.full_like(X, np.inf)
    dt = np.minimum(params.dt_base, params.adaptivity * np.maximum(gmin, params.stop_epsilon) ** 2 / kappa)
    if t_cap is not None:
        dt = np.minimum(dt, t_cap)
    if order is None:
        order = np.argsort(P[0]) if len(P) else None
    Xn = X + np.sqrt(kappa * dt) * xi
    Pn = P.copy()
    G0 = G[:, 0].copy()
    reflected = np.zeros(X.shape, dtype=bool)
    blowup = np.zeros(X.shape, dtype=bool)
    collided = np.zeros(X.shape, dtype=bool)
    crossed = np.sign(Pn - Xn[:, None]) != S
    if crossed.any():
        for r in np.flatnonzero(crossed.any(axis=1)):
            if partner >= 0 and crossed[r, partner]:
                collided[r] = True
                Pn[r, partner] = Xn[r]
                continue
            for side in (-1.0, 1.0):
                cols = np.flatnonzero(crossed[r] & (S[r] == side))
                if not cols.size:
                    continue
                # the nearest gap reflects and the crossed block follows it, pushing
                # any point it would overtake; the drive keeps its increment
                q = cols[np.argmin(np.abs(P[r, cols] - X[r]))]
                shift = 2 * (Xn[r] - Pn[r, q])
                block = set(cols.tolist())
                while True:
                    reach = max(side * (Pn[r, j] + shift - Xn[r]) for j in block)
                    extra = [j for j in np.flatnonzero(S[r] == side)
                             if j not in block and side * (Pn[r, j] - Xn[r]) <= reach]
                    if not extra:
                        break
                    block.update(extra)
                if partner in block:
                    collided[r] = True
                    Pn[r, partner] = Xn[r]
                    break
                Pn[r, sorted(block)] += shift
            reflected[r] = True
            if not collided[r] and (np.diff(Pn[r][order]) < 0).any():
                blowup[r] = True
    live = ~(collided | blowup)
    Gn = G.copy()
    if live.any():
        x, p, g = Xn[live], Pn[live], Gn[live]
        bad, used = _flow(dyn, x, p, g, S[live], dt[live], watch, params.flow_adaptivity,
                          partner, params.stop_epsilon)
        Xn[live], Pn[live], Gn[live] = x, p, g
        blowup[np.flatnonzero(live)[bad]] = True
        dt = dt.copy()
        dt[live] = used
    if collided.any():
        # coefficients still advance over the step, with the drive frozen
        Gn[collided] = _rk4(dyn, Xn[collided], G[collided], dt[collided])
    Gn[:, 0] = G0 + 2 * dt
    return Xn, Pn, Gn, dt, reflected, blowup, collided


@dataclass
class _Batch:
    X: np.ndarray
    P: np.ndarray
    G: np.ndarray
    T: np.ndarray
    steps: np.ndarray
    status: np.ndarray
    reflections: np.ndarray

    @classmethod
    def start(cls, dyn: Dynamics, initial: dict[str, float], n: int, depth: int) -> "_Batch":
        X = np.full(n, float(initial[dyn.drive]))
        P = np.tile(np.array([float(initial[p]) for p in dyn.passive]), (n, 1))
        return cls(X, P, np.zeros((n, depth - 1)), np.zeros(n), np.zeros(n, dtype=np.int64),
                   np.zeros(n, dtype=np.int8), np.zeros(n, dtype=np.int64))


def _stop_gap(dyn: Dynamics, stop: StopPredicate, X, P) -> np.ndarray:
    return stop.gap(dyn.values(X, P))


def _partner_column(dyn: Dynamics, stop: StopPredicate | None) -> int:
    name = stop.partner(dyn.drive) if stop is not None else None
    return dyn.passive.index(name) if name in dyn.passive else -1


def _advance(dyn: Dynamics, b: _Batch, params: SimParams, stop: StopPredicate,
             noise: NoiseStreams, t_end: float | None = None) -> None:
    """Advance running rows of ``b`` until stop, timeout, blowup or ``t_end``."""
    idx = np.flatnonzero(b.status == RUNNING)
    X, P, G, T = b.X[idx].copy(), b.P[idx].copy(), b.G[idx].copy(), b.T[idx].copy()
    steps, refl = b.steps[idx].copy(), b.reflections[idx].copy()
    S = np.sign(P - X[:, None])
    if (S == 0).any():
        raise ValueError("a passive point starts on top of the drive")
    eps = params.stop_epsilon
    partner = _partner_column(dyn, stop)
    order = np.argsort(P[0]) if idx.size else None
    while idx.size:
        hit = _stop_gap(dyn, stop, X, P) < eps
        out_of_steps = steps >= params.max_steps
        at_end = (T >= t_end) if t_end is not None else np.zeros_like(hit)
        leave = hit | out_of_steps | at_end
        if leave.any():
            r = idx[leave]
            b.X[r], b.P[r], b.G[r], b.T[r] = X[leave], P[leave], G[leave], T[leave]
            b.steps[r], b.reflections[r] = steps[leave], refl[leave]
            b.status[r] = np.where(hit[leave], STOPPED, np.where(out_of_steps[leave], TIMEOUT, RUNNING))
            keep = ~leave
            idx, X, P, G, T, S = idx[keep], X[keep], P[keep], G[keep], T[keep], S[keep]
            steps, refl = steps[keep], refl[keep]
            if not idx.size:
                break
        xi = noise.draw(idx)
        cap = None if t_end is None else t_end - T
        X, P, G, dt, reflected, blowup, collided = _one_step(dyn, X, P, G, S, params, xi, cap,
                                                             partner, order)
        T = T + dt
        steps += 1
        refl += reflected
        if collided.any():
            r = idx[collided]
            b.X[r], b.P[r], b.G[r], b.T[r] = X[collided], P[collided], G[collided], T[collided]
            b.steps[r], b.reflections[r] = steps[collided], refl[collided]
            b.status[r] = STOPPED
            keep = ~collided
            idx, X, P, G, T, S = idx[keep], X[keep], P[keep], G[keep], T[keep], S[keep]
            steps, refl = steps[keep], refl[keep]
            blowup = blowup[keep]
        if blowup.any():
            r = idx[blowup]
            b.X[r], b.P[r], b.G[r], b.T[r] = X[blowup], P[blowup], G[blowup], T[blowup]
            b.steps[r], b.reflections[r] = steps[blowup], refl[blowup]
            b.status[r] = BLOWUP
            keep = ~blowup
            idx, X, P, G, T, S = idx[keep], X[keep], P[keep], G[keep], T[keep], S[keep]
            steps, refl = steps[keep], refl[keep]


# -- single-path interface ------------------------------------------------

@dataclass(frozen=True)
class StopRecord:
    reason: str
    time: float
    steps: int


@dataclass
class SimState:
    t: float
    drive: float
    passive: dict[str, float]
    coeffs: np.ndarray
    phase: str = "single"
    stopped: StopRecord | None = None
    steps: int = 0
    reflections: int = 0
    history: list = field(default_factory=list)

    @classmethod
    def initial(cls, cfg: SleConfig, positions: dict[str, float], depth: int = 2,
                phase: str = "single") -> "SimState":
        missing = set(cfg.names) - set(positions)
        if missing:
            raise KeyError(f"no initial position for {sorted(missing)}")
        return cls(0.0, float(positions[cfg.driving]),
                   {p: float(positions[p]) for p in cfg.passive},
                   np.zeros(depth - 1), phase)

    def positions(self, cfg: SleConfig) -> dict[str, float]:
        out = dict(self.passive)
        out[cfg.driving] = self.drive
        return out

    def values(self, cfg: SleConfig) -> dict[str, float]:
        out = self.positions(cfg)
        for k, g in enumerate(self.coeffs):
            out[f"f{k + 2}"] = float(g)
        return out


def _state_batch(state: SimState, dyn: Dynamics) -> _Batch:
    depth = len(state.coeffs) + 1
    if depth < dyn.depth:
        raise ValueError("state carries fewer coefficients than the dynamics needs")
    return _Batch(np.array([state.drive]), np.array([[state.passive[p] for p in dyn.passive]]),
                  np.array([state.coeffs[:dyn.depth - 1]], dtype=float), np.array([state.t]),
                  np.array([state.steps], dtype=np.int64), np.zeros(1, dtype=np.int8),
                  np.array([state.reflections], dtype=np.int64))


def _batch_state(b: _Batch, dyn: Dynamics, phase: str, history=None) -> SimState:
    status = int(b.status[0])
    stopped = None
    if status != RUNNING:
        stopped = StopRecord(STATUS_NAMES[status], float(b.T[0]), int(b.steps[0]))
    return SimState(float(b.T[0]), float(b.X[0]),
                    {p: float(b.P[0, k]) for k, p in enumerate(dyn.passive)},
                    b.G[0].copy(), phase, stopped, int(b.steps[0]), int(b.reflections[0]),
                    list(history or []))


def _dynamics(cfg: SleConfig, kappa, depth: int) -> Dynamics:
    if kappa is None:
        if cfg.value is None:
            raise ValueError(f"config {cfg.name!r} has no numeric kappa; pass kappa=")
        kappa = cfg.value
    return Dynamics(cfg, kappa, depth)


def step(state: SimState, cfg: SleConfig, params: SimParams, noise: float, kappa=None,
         stop: StopPredicate | None = None) -> SimState:
    """One time step driven by the standard normal ``noise``."""
    if state.stopped is not None:
        raise ValueError("state is already stopped")
    dyn = _dynamics(cfg, kappa, len(state.coeffs) + 1)
    if stop is None:
        try:
            stop = default_stop(cfg)
        except ValueError:
            stop = None
    b = _state_batch(state, dyn)
    S = np.sign(b.P - b.X[:, None])
    X, P, G, dt, reflected, blowup, collided = _one_step(
        dyn, b.X, b.P, b.G, S, params, np.array([float(noise)]), partner=_partner_column(dyn, stop))
    if blowup[0]:
        raise NumericalBlowupError(f"drive crossed a passive point at t={state.t}; dt too coarse")
    t = state.t + float(dt[0])
    record = StopRecord("collision", t, state.steps + 1) if collided[0] else None
    return SimState(t, float(X[0]), {p: float(P[0, k]) for k, p in enumerate(dyn.passive)},
                    G[0].copy(), state.phase, record, state.steps + 1, state.reflections + int(reflected[0]),
                    list(state.history))


def _rng_streams(params: SimParams, rng) -> NoiseStreams:
    if rng is None:
        return NoiseStreams.for_paths(params.seed, [0])
    return NoiseStreams([rng])


def run_until_stop(state: SimState, cfg: SleConfig, params: SimParams, stop: StopPredicate | None = None,
                   kappa=None, rng: np.random.Generator | None = None, raise_on_failure: bool = True) -> SimState:
    """Iterate :func:`step` until ``stop`` holds (gap below ``stop_epsilon``)."""
    stop = stop or default_stop(cfg)
    dyn = _dynamics(cfg, kappa, len(state.coeffs) + 1)
    b = _state_batch(state, dyn)
    _advance(dyn, b, params, stop, _rng_streams(params, rng))
    out = _batch_state(b, dyn, state.phase, state.history)
    if raise_on_failure and out.stopped.reason == "timeout":
        raise SimulationTimeout(f"no collision within {params.max_steps} steps")
    if raise_on_failure and out.stopped.reason == "blowup":
        raise NumericalBlowupError("drive crossed a passive point; dt too coarse")
    return out


def _duality_points(points) -> dict[str, float]:
    if isinstance(points, dict):
        u, y, v, x = (float(points[k]) for k in ("u", "y", "v", "x"))
    else:
        u, y, v, x = (float(p) for p in points)
    if not u < y < v < x:
        raise ValueError("duality points must satisfy u < y < v < x")
    return {"u": u, "y": y, "v": v, "x": x}


def run_glued(points, kappa, params: SimParams, rng: np.random.Generator | None = None) -> SimState:
    """The two-phase SLE_{16/kappa}: star1 until the triple collision, then star2."""
    pts = _duality_points(points)
    if not Fraction(kappa) < 4:
        raise ValueError("the glued process needs kappa < 4")
    cfgs = builtin_configs()
    d1 = Dynamics(cfgs["star1"], kappa, params.depth)
    d2 = Dynamics(cfgs["star2"], kappa, params.depth)
    b = _Batch.start(d1, {f"{k}*": v for k, v in pts.items()}, 1, params.depth)
    noise = _rng_streams(params, rng)
    _advance(d1, b, params, default_stop(cfgs["star1"]), noise)
    first = _batch_state(b, d1, "starPhase1")
    if first.stopped.reason != "collision":
        raise SimulationTimeout(f"phase 1 ended by {first.stopped.reason}")
    b2 = _reseed(d2, b, d1, params)
    _advance(d2, b2, params, default_stop(cfgs["star2"]), noise)
    out = _batch_state(b2, d2, "starPhase2", [first])
    if out.stopped.reason != "collision":
        raise SimulationTimeout(f"phase 2 ended by {out.stopped.reason}")
    return out


def _reseed(d2: Dynamics, b: _Batch, d1: Dynamics, params: SimParams) -> _Batch:
    """Phase-2 start: same coefficients and time, points u~ = U*, y~ = Y*, w~ = Y* + offset."""
    u = b.P[:, d1.passive.index("u*")]
    y = b.X
    cols = {"~u*": u, "~w*": y + params.offset}
    P = np.stack([cols[p] for p in d2.passive], axis=1)
    status = np.where(b.status == STOPPED, RUNNING, b.status).astype(np.int8)
    return _Batch(y.copy(), P, b.G.copy(), b.T.copy(), b.steps.copy(), status, b.reflections.copy())


def evaluate_observable(poly: GradedPoly, state: SimState, cfg: SleConfig, kappa) -> float:
    """Numeric value of ``poly`` at the state's positions and coefficients."""
    needed = [v for v in poly.variables() if v.startswith("f")]
    depth = len(state.coeffs) + 1
    for v in needed:
        if int(v[1:]) > depth:
            raise ValueError(f"observable needs {v} but the state carries depth {depth}")
    vals = state.values(cfg)
    return float(poly.compile(float(kappa))({k: np.asarray(v) for k, v in vals.items()}))


# -- Monte Carlo ------------------------------------------------------------

@dataclass(frozen=True)
class Experiment:
    """Everything a worker needs, as plain picklable data."""

    kind: str
    dynamics: tuple
    stops: tuple
    initial: dict
    observable: NumericPoly
    params: SimParams
    checkpoints: tuple = ()
    label: str = ""


def single_experiment(cfg: SleConfig, kappa, initial: dict[str, float], observable: GradedPoly,
                      params: SimParams, stop: StopPredicate | None = None,
                      checkpoints=(), label: str = "") -> Experiment:
    params.check_initial(initial)
    depth = max(params.depth, _observable_depth(observable))
    params = replace(params, depth=depth)
    dyn = Dynamics(cfg, kappa, depth)
    return Experiment("single", (dyn,), (stop or default_stop(cfg),), dict(initial),
                      observable.compile(float(kappa)), params, tuple(sorted(checkpoints)),
                      label or cfg.name)


def glued_experiment(points, kappa, observable: GradedPoly, params: SimParams, label: str = "glued") -> Experiment:
    pts = _duality_points(points)
    if not Fraction(kappa) < 4:
        raise ValueError("the glued process needs kappa < 4")
    positions = [v for v in observable.variables() if not v.startswith("f")]
    if positions:
        raise ValueError(f"glued observables must depend on coefficients only, got {positions}")
    params.check_initial(pts)
    depth = max(params.depth, _observable_depth(observable))
    params = replace(params, depth=depth)
    cfgs = builtin_configs()
    dyns = (Dynamics(cfgs["star1"], kappa, depth), Dynamics(cfgs["star2"], kappa, depth))
    stops = (default_stop(cfgs["star1"]), default_stop(cfgs["star2"]))
    return Experiment("glued", dyns, stops, {f"{k}*": v for k, v in pts.items()},
                      observable.compile(float(kappa)), params, (), label)


def _observable_depth(poly: GradedPoly) -> int:
    caps = [int(v[1:]) for v in poly.variables() if v.startswith("f")]
    return max(caps, default=2)


def simulate_paths(exp: Experiment, indices) -> dict:
    """Simulate the given path indices; the result depends only on the indices."""
    indices = np.asarray(indices, dtype=np.int64)
    n = len(indices)
    params = exp.params
    noise = NoiseStreams.for_paths(params.seed, indices)
    d1 = exp.dynamics[0]
    b = _Batch.start(d1, exp.initial, n, params.depth)
    checkpoint_values = np.empty((n, len(exp.checkpoints)))
    for k, tk in enumerate(exp.checkpoints):
        _advance(d1, b, params, exp.stops[0], noise, t_end=tk)
        checkpoint_values[:, k] = _observe(exp.observable, d1, b)
    _advance(d1, b, params, exp.stops[0], noise)
    out = {"indices": indices, "checkpoint_values": checkpoint_values}
    dyn = d1
    if exp.kind == "glued":
        out["phase1_time"] = b.T.copy()
        out["phase1_status"] = b.status.copy()
        dyn = exp.dynamics[1]
        b = _reseed(dyn, b, d1, params)
        _advance(dyn, b, params, exp.stops[1], noise)
    out.update(values=_observe(exp.observable, dyn, b), tau=b.T.copy(), status=b.status.copy(),
               steps=b.steps.copy(), reflections=b.reflections.copy())
    return out


def _observe(obs: NumericPoly, dyn: Dynamics, b: _Batch) -> np.ndarray:
    vals = dyn.values(b.X, b.P, b.G)
    return np.asarray(obs(vals), dtype=float) + np.zeros(len(b.X))


@dataclass
class MonteCarloResult:
    mean: float
    std_error: float
    n: int
    valid: bool
    diagnostics: dict
    values: np.ndarray
    checkpoint_means: list = field(default_factory=list)
    checkpoint_std_errors: list = field(default_factory=list)

    def to_json(self, include_values: bool = False) -> dict:
        out = {"mean": self.mean, "std_error": self.std_error, "n": self.n, "valid": self.valid,
               "diagnostics": self.diagnostics}
        if self.checkpoint_means:
            out["checkpoint_means"] = self.checkpoint_means
            out["checkpoint_std_errors"] = self.checkpoint_std_errors
        if include_values:
            out["values"] = [float(v) for v in self.values]
        return out


def mean_and_error(values) -> tuple[float, float]:
    """Sample mean and standard error with compensated summation."""
    v = [float(x) for x in values]
    n = len(v)
    if n < 2:
        raise ValueError("need at least two samples")
    m = math.fsum(v) / n
    var = math.fsum((x - m) ** 2 for x in v) / (n - 1)
    return m, math.sqrt(var / n)


def tail_diagnostics(values: np.ndarray) -> dict:
    """Hill estimate of the tail index of |values| and the largest single share."""
    a = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]
    total = math.fsum(a)
    k = max(10, int(math.sqrt(len(a))))
    out = {"max_share": float(a[0] / total) if total > 0 else 0.0, "hill_k": k}
    spread = float(np.mean(np.log(a[:k] / a[k]))) if len(a) > k and a[k] > 0 else 0.0
    if spread > 0:
        out["hill_tail_index"] = 1.0 / spread
    else:
        out["hill_tail_index"] = None
    return out


def _histogram(tau: np.ndarray, bins: int = 20) -> dict:
    pos = tau[tau > 0]
    if not len(pos):
        return {"edges": [], "counts": []}
    lo, hi = np.log10(pos.min()), np.log10(pos.max())
    if hi <= lo:
        hi = lo + 1
    counts, edges = np.histogram(pos, bins=np.logspace(lo, hi, bins + 1))
    return {"edges": [float(e) for e in edges], "counts": [int(c) for c in counts]}


def monte_carlo(exp: Experiment, n_paths: int, workers: int = 1, first_index: int = 0) -> MonteCarloResult:
    """Mean and standard error of the stopped observable over ``n_paths`` paths."""
    if n_paths < 2:
        raise ValueError("need at least two paths")
    indices = np.arange(first_index, first_index + n_paths)
    if workers <= 1:
        parts = [simulate_paths(exp, indices)]
    else:
        from concurrent.futures import ProcessPoolExecutor

        chunks = np.array_split(indices, workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(simulate_paths, [exp] * len(chunks), chunks))
    data = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    status = data["status"]
    values = data["values"]
    ok = status == STOPPED
    mean, se = mean_and_error(values[ok]) if ok.sum() >= 2 else (float("nan"), float("nan"))
    diag = {
        "stop_time_histogram": _histogram(data["tau"][ok]),
        "timeout_fraction": float(np.mean(status == TIMEOUT)),
        "blowup_fraction": float(np.mean(status == BLOWUP)),
        "reflections": int(data["reflections"].sum()),
        "mean_steps": float(np.mean(data["steps"])),
        "max_steps": int(np.max(data["steps"])),
        "tail": tail_diagnostics(values[ok]) if ok.any() else {},
    }
    if exp.kind == "glued":
        diag["phase1_mean_time"] = float(np.mean(data["phase1_time"]))
    result = MonteCarloResult(mean, se, int(n_paths), bool(ok.all()), diag, values)
    for k in range(len(exp.checkpoints)):
        m, s = mean_and_error(data["checkpoint_values"][:, k])
        result.checkpoint_means.append(m)
        result.checkpoint_std_errors.append(s)
    return result
