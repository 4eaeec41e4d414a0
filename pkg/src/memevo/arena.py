"""Two-dimensional Khepera-style arena.

The world is the square ``[-1, 1]^2`` with a central box obstacle and a light
in the top-right corner.  The agent is a disc of radius ``r`` driven by two
wheels; it reads three IR and three light sensors mounted at bearings
+90, +10 and -90 degrees relative to its heading.  Headings are measured
counter-clockwise from +x, so North is ``pi/2`` and a left turn increases the
heading.

Geometry lives in small numba-compiled functions shared by the Python API and
by the trial kernel.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .snn import Action, Network


class Scenario(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class ArenaConfig:
    bound: float = 1.0
    box: tuple[float, float, float, float] = (-0.4, -0.4, 0.4, 0.4)
    light: tuple[float, float] = (1.0, 1.0)
    radius: float = 0.0275
    speed: float = 0.005
    start: tuple[float, float, float] = (-0.8, -0.8, math.pi / 2)
    start_jitter: bool = False
    sensor_bearings: tuple[float, float, float] = (math.pi / 2, math.radians(10), -math.pi / 2)
    ir_range: float = 0.1
    light_dmin: float = 0.05
    light_imax: float = 400.0
    goal_line: float = 1.6
    ir_noise: float = 0.02
    light_noise: float = 0.1
    slippage: float = 0.1
    max_timesteps: int = 4000
    bump_reverse: float = 0.1
    bump_penalty: int = 10
    goal_bonus: float = 2500.0
    fitness_scale: float = 1000.0
    denom_floor: float = 0.1
    # literal |x + y| in the positional term; rewards the start corner
    fitness_abs: bool = False

    def __post_init__(self):
        x, y, _ = self.start
        if not x + y < -1.5:
            raise ValueError("start pose must satisfy x + y < -1.5")

    def packed(self) -> np.ndarray:
        """Flat float array consumed by the trial kernel (see ``_A_*``)."""
        return np.array([
            self.bound, *self.box, *self.light, self.radius, self.speed,
            *self.sensor_bearings, self.ir_range, self.light_dmin,
            self.light_imax, self.goal_line, self.ir_noise, self.light_noise,
            self.slippage, self.bump_reverse, float(self.bump_penalty),
            self.goal_bonus, self.fitness_scale, self.denom_floor,
            1.0 if self.fitness_abs else 0.0,
        ], dtype=np.float64)


(_A_BOUND, _A_X0, _A_Y0, _A_X1, _A_Y1, _A_LX, _A_LY, _A_R, _A_V,
 _A_B0, _A_B1, _A_B2, _A_IR, _A_DMIN, _A_IMAX, _A_GOAL, _A_IRN, _A_LN,
 _A_SLIP, _A_REV, _A_PEN, _A_BONUS, _A_SCALE, _A_FLOOR, _A_ABS) = range(25)


@dataclass
class AgentPose:
    x: float
    y: float
    heading: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.x, self.y, self.heading


@dataclass
class TrialResult:
    fitness: float
    timesteps: int
    st: int
    goal: bool = False
    rewards: int = 0
    phase1_timestep: int = -1
    bumps: int = 0
    log: Optional[np.ndarray] = field(default=None, repr=False)


LOG_COLUMNS = ("timestep", "x", "y", "heading", "action", "f",
               "pos_stdp_hp", "neg_stdp_hp", "pos_stdp_peo", "neg_stdp_peo",
               "pos_stdp_lin", "neg_stdp_lin", "mean_w_hp", "mean_w_peo", "mean_w_lin")


# -- geometry cores --------------------------------------------------------

@numba.njit(cache=True)
def _ray_box(px, py, dx, dy, x0, y0, x1, y1):
    """Entry distance of the ray into the rectangle, ``inf`` if missed."""
    tmin, tmax = -np.inf, np.inf
    if dx != 0.0:
        ta, tb = (x0 - px) / dx, (x1 - px) / dx
        if ta > tb:
            ta, tb = tb, ta
        tmin, tmax = max(tmin, ta), min(tmax, tb)
    elif px < x0 or px > x1:
        return np.inf
    if dy != 0.0:
        ta, tb = (y0 - py) / dy, (y1 - py) / dy
        if ta > tb:
            ta, tb = tb, ta
        tmin, tmax = max(tmin, ta), min(tmax, tb)
    elif py < y0 or py > y1:
        return np.inf
    if tmax < tmin or tmax < 0.0:
        return np.inf
    return max(tmin, 0.0)


@numba.njit(cache=True)
def _raycast(px, py, angle, arena):
    dx, dy = math.cos(angle), math.sin(angle)
    bound = arena[_A_BOUND]
    d = np.inf
    if dx > 0.0:
        d = min(d, (bound - px) / dx)
    elif dx < 0.0:
        d = min(d, (-bound - px) / dx)
    if dy > 0.0:
        d = min(d, (bound - py) / dy)
    elif dy < 0.0:
        d = min(d, (-bound - py) / dy)
    d = min(d, _ray_box(px, py, dx, dy, arena[_A_X0], arena[_A_Y0], arena[_A_X1], arena[_A_Y1]))
    return max(d, 0.0)


@numba.njit(cache=True)
def _ir_scaled(d, ir_range):
    v = 1.0 - d / ir_range
    return v if v > 0.0 else 0.0


@numba.njit(cache=True)
def _light_scaled(px, py, angle, arena):
    lx, ly = arena[_A_LX], arena[_A_LY]
    vx, vy = lx - px, ly - py
    d = math.sqrt(vx * vx + vy * vy)
    if d > 0.0:
        cos_a = (vx * math.cos(angle) + vy * math.sin(angle)) / d
        if cos_a < 0.0:
            return 0.0
        hit = _ray_box(px, py, vx / d, vy / d, arena[_A_X0], arena[_A_Y0], arena[_A_X1], arena[_A_Y1])
        if hit <= d:
            return 0.0
    else:
        cos_a = 1.0
    dmin = arena[_A_DMIN]
    i = cos_a / max(d * d, dmin * dmin)
    imax = arena[_A_IMAX]
    if i > imax:
        i = imax
    return i / imax


@numba.njit(cache=True)
def _clip01(v):
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


@numba.njit(cache=True)
def _sense(x, y, h, arena, ir_mult, light_mult, out):
    """Fill ``out`` with [light0, light2, light5, ir0, ir2, ir5]."""
    r = arena[_A_R]
    for k in range(3):
        ang = h + arena[_A_B0 + k]
        sx, sy = x + r * math.cos(ang), y + r * math.sin(ang)
        out[k] = _clip01(_light_scaled(sx, sy, ang, arena) * light_mult[k])
        out[3 + k] = _clip01(_ir_scaled(_raycast(sx, sy, ang, arena), arena[_A_IR]) * ir_mult[k])


@numba.njit(cache=True)
def _resolve(x, y, arena):
    """Push a disc centre out of walls and box (cancels penetration only)."""
    r = arena[_A_R]
    lim = arena[_A_BOUND] - r
    x = min(max(x, -lim), lim)
    y = min(max(y, -lim), lim)
    x0, y0, x1, y1 = arena[_A_X0], arena[_A_Y0], arena[_A_X1], arena[_A_Y1]
    cx, cy = min(max(x, x0), x1), min(max(y, y0), y1)
    ex, ey = x - cx, y - cy
    d = math.sqrt(ex * ex + ey * ey)
    if d < r:
        if d > 0.0:
            x, y = cx + ex * r / d, cy + ey * r / d
        else:
            # centre inside the footprint: leave through the nearest face
            pen = np.array([x - x0, x1 - x, y - y0, y1 - y])
            k = np.argmin(pen)
            if k == 0:
                x = x0 - r
            elif k == 1:
                x = x1 + r
            elif k == 2:
                y = y0 - r
            else:
                y = y1 + r
    return x, y


@numba.njit(cache=True)
def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@numba.njit(cache=True)
def _bumps(x, y, h, arena):
    """Front-left / front-right contact flags (90 degree arcs at +-45)."""
    r = arena[_A_R]
    tol = 1e-9
    lim = arena[_A_BOUND] - r
    left = False
    right = False
    dirs = np.empty(5)
    n = 0
    if x >= lim - tol:
        dirs[n] = 0.0
        n += 1
    if x <= -lim + tol:
        dirs[n] = math.pi
        n += 1
    if y >= lim - tol:
        dirs[n] = math.pi / 2
        n += 1
    if y <= -lim + tol:
        dirs[n] = -math.pi / 2
        n += 1
    x0, y0, x1, y1 = arena[_A_X0], arena[_A_Y0], arena[_A_X1], arena[_A_Y1]
    cx, cy = min(max(x, x0), x1), min(max(y, y0), y1)
    ex, ey = cx - x, cy - y
    if math.sqrt(ex * ex + ey * ey) <= r + tol:
        dirs[n] = math.atan2(ey, ex)
        n += 1
    for k in range(n):
        b = _wrap(dirs[k] - h)
        if -tol <= b < math.pi / 2:
            left = True
        if -math.pi / 2 < b <= tol:
            right = True
    return left, right


@numba.njit(cache=True)
def _move(x, y, h, action, slipped, arena):
    v = arena[_A_V]
    if slipped:
        return x, y, h
    if action == 0:
        vl, vr = v, v
    elif action == 1:
        vl, vr = 0.5 * v, v
    else:
        vl, vr = v, 0.5 * v
    lin = 0.5 * (vl + vr)
    dh = (vr - vl) / (2.0 * arena[_A_R])
    mid = h + 0.5 * dh
    x, y = _resolve(x + lin * math.cos(mid), y + lin * math.sin(mid), arena)
    return x, y, h + dh


@numba.njit(cache=True)
def _reverse(x, y, h, arena):
    n = 20
    step = arena[_A_REV] / n
    for _ in range(n):
        x, y = _resolve(x - step * math.cos(h), y - step * math.sin(h), arena)
    return x, y


@numba.njit(cache=True)
def _fitness(x, y, st, goal, arena):
    s = x + y
    if arena[_A_ABS] > 0.0:
        s = abs(s)
    denom = max(arena[_A_GOAL] - s, arena[_A_FLOOR])
    f = arena[_A_SCALE] / denom - st
    if goal:
        f += arena[_A_BONUS]
    return max(f, 0.0)


# -- public API ------------------------------------------------------------

def _bearing_angle(pose: AgentPose, bearing: float) -> float:
    return pose.heading + bearing


def _sensor_point(pose: AgentPose, bearing: float, arena: ArenaConfig):
    ang = _bearing_angle(pose, bearing)
    return (pose.x + arena.radius * math.cos(ang),
            pose.y + arena.radius * math.sin(ang), ang)


def ir_from_distance(d: float, arena: ArenaConfig = ArenaConfig()) -> tuple[float, float]:
    """``(raw, scaled)`` IR response for an obstacle at distance ``d``."""
    scaled = _ir_scaled(d, arena.ir_range)
    return 1023.0 * scaled, scaled


def ir_reading(pose: AgentPose, bearing: float, arena: ArenaConfig = ArenaConfig(),
               rng: Optional[np.random.Generator] = None) -> tuple[float, float]:
    """Ray-cast IR sensor; pass ``rng`` for the +-2% multiplicative noise."""
    sx, sy, ang = _sensor_point(pose, bearing, arena)
    scaled = _ir_scaled(_raycast(sx, sy, ang, arena.packed()), arena.ir_range)
    if rng is not None:
        scaled = float(np.clip(scaled * rng.uniform(1 - arena.ir_noise, 1 + arena.ir_noise), 0, 1))
    return 1023.0 * scaled, scaled


def light_reading(pose: AgentPose, bearing: float, arena: ArenaConfig = ArenaConfig(),
                  rng: Optional[np.random.Generator] = None) -> tuple[float, float]:
    """Light sensor; raw runs from 500 (dark) down to 8 (fully lit)."""
    sx, sy, ang = _sensor_point(pose, bearing, arena)
    scaled = _light_scaled(sx, sy, ang, arena.packed())
    if rng is not None:
        scaled = float(np.clip(scaled * rng.uniform(1 - arena.light_noise, 1 + arena.light_noise), 0, 1))
    return 500.0 - 492.0 * scaled, scaled


def sense(pose: AgentPose, arena: ArenaConfig = ArenaConfig(),
          rng: Optional[np.random.Generator] = None):
    """Six scaled readings [light0, light2, light5, ir0, ir2, ir5] and bump flags."""
    packed = arena.packed()
    if rng is None:
        ir_mult = light_mult = np.ones(3)
    else:
        ir_mult = rng.uniform(1 - arena.ir_noise, 1 + arena.ir_noise, 3)
        light_mult = rng.uniform(1 - arena.light_noise, 1 + arena.light_noise, 3)
    out = np.zeros(6)
    _sense(pose.x, pose.y, pose.heading, packed, ir_mult, light_mult, out)
    left, right = _bumps(pose.x, pose.y, pose.heading, packed)
    return out, bool(left), bool(right)


def apply_action(pose: AgentPose, action: Action, arena: ArenaConfig = ArenaConfig(),
                 slipped: bool = False) -> AgentPose:
    x, y, h = _move(pose.x, pose.y, pose.heading, int(action), slipped, arena.packed())
    return AgentPose(x, y, h)


def bump_interrupt(pose: AgentPose, st: int, arena: ArenaConfig = ArenaConfig()):
    x, y = _reverse(pose.x, pose.y, pose.heading, arena.packed())
    return AgentPose(x, y, pose.heading), st + arena.bump_penalty


def fitness_step(pose: AgentPose, st: int, goal_reached: bool,
                 arena: ArenaConfig = ArenaConfig()) -> float:
    return _fitness(pose.x, pose.y, st, goal_reached, arena.packed())


def start_pose(arena: ArenaConfig = ArenaConfig(),
               rng: Optional[np.random.Generator] = None) -> AgentPose:
    x, y, h = arena.start
    if arena.start_jitter and rng is not None:
        lim = arena.bound - arena.radius
        while True:
            x, y = rng.uniform(-lim, -0.5, 2)
            if x + y < -1.5:
                break
    return AgentPose(x, y, h)


def trial_noise(arena: ArenaConfig, scenario: Scenario, seed: int, max_t: int):
    """Start pose and pre-drawn noise arrays for one trial."""
    rng = np.random.default_rng(seed)
    pose = start_pose(arena, rng)
    if scenario is Scenario.DYNAMIC:
        slip = rng.random(max_t)
        ir = rng.uniform(1 - arena.ir_noise, 1 + arena.ir_noise, (max_t, 3))
        light = rng.uniform(1 - arena.light_noise, 1 + arena.light_noise, (max_t, 3))
    else:
        slip = np.ones(max_t)
        ir = light = np.ones((max_t, 3))
    return pose, slip, ir, light


def run_trial_reference(net: Network, arena: ArenaConfig = ArenaConfig(),
                        scenario: Scenario = Scenario.STATIC, seed: int = 0,
                        max_timesteps: Optional[int] = None) -> TrialResult:
    """Slow pure-Python trial built on :func:`memevo.snn.run_timestep`.

    Exists to cross-check the compiled kernel; use :func:`run_trial` for work.
    """
    from .snn import run_timestep

    max_t = arena.max_timesteps if max_timesteps is None else max_timesteps
    net.reset_state(reset_weights=True)
    pose, slip, ir, light = trial_noise(arena, scenario, seed, max_t)
    packed = arena.packed()
    dynamic = scenario is Scenario.DYNAMIC
    x, y, h = pose.as_tuple()
    sensors = np.zeros(6)
    ones = np.ones(3)
    st = bumps = rewards = t_used = 0
    best, goal, phase1 = 0.0, False, -1
    for t in range(max_t):
        _sense(x, y, h, packed, ir[t] if dynamic else ones,
               light[t] if dynamic else ones, sensors)
        action = run_timestep(net, sensors)
        x, y, h = _move(x, y, h, int(action), dynamic and slip[t] < arena.slippage, packed)
        st += 1
        if any(_bumps(x, y, h, packed)):
            x, y = _reverse(x, y, h, packed)
            st += arena.bump_penalty
            bumps += 1
        t_used = t + 1
        if dynamic:
            if rewards == 0 and x + y >= arena.goal_line:
                rewards, phase1 = 1, t_used
            elif rewards == 1 and y - x >= arena.goal_line:
                rewards = 2
            best, goal = float(rewards), rewards > 0
            if rewards == 2:
                break
        else:
            reached = x + y >= arena.goal_line
            best = max(best, _fitness(x, y, st, reached, packed))
            if reached:
                goal = True
                break
    return TrialResult(best, t_used, st, goal, rewards, phase1, bumps)


def run_trial(net: Network, arena: ArenaConfig = ArenaConfig(),
              scenario: Scenario = Scenario.STATIC, seed: int = 0,
              log: bool = False, max_timesteps: Optional[int] = None) -> TrialResult:
    """Reset ``net`` and drive the agent until goal or timestep cap.

    Static trials score the best value of the positional fitness; dynamic
    trials run noisy and score the number of reward zones found (0, 1, 2).
    """
    from . import kernel
    return kernel.run_trial(net, arena, scenario, seed, log, max_timesteps)
