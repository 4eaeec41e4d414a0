"""Compiled trial engine.

A :class:`~memevo.snn.Network` is flattened into arrays holding its enabled
connections (in genome order) plus an outgoing-edge index per neuron.  Spikes
on delayed hidden-to-hidden edges go into a ring buffer with one row per
pending step, which replaces the reference engine's explicit event list.
Floating-point accumulation order matches :func:`memevo.snn.run_step` so both
engines agree exactly.

Noise for a trial is drawn up front from ``numpy.random.default_rng(seed)``
in this order: start jitter (if enabled), slip draws ``(T,)``, IR multipliers
``(T, 3)``, light multipliers ``(T, 3)``.
"""
from __future__ import annotations

from typing import NamedTuple, Optional

import numba
import numpy as np

from .arena import (ArenaConfig, LOG_COLUMNS, Scenario, TrialResult, _A_GOAL,
                    _A_PEN, _A_SLIP, _bumps, _fitness, _move, _reverse, _sense,
                    trial_noise)
from .snn import N_INPUTS, N_OUTPUTS, Network
from .synapse import CONST, _apply_dq, _q_max, _stdp_delta, _weight

_P_A, _P_B, _P_C, _P_CINI, _P_THR, _P_STEPS, _P_LS, _P_THETA = range(8)


class CompiledNet(NamedTuple):
    n_hidden: int
    sign: np.ndarray
    pre: np.ndarray
    post: np.ndarray
    kind: np.ndarray
    delay: np.ndarray
    q: np.ndarray
    w: np.ndarray
    out_start: np.ndarray
    out_conn: np.ndarray
    var_conn: np.ndarray
    genome_pos: np.ndarray


def pack_snn(net: Network) -> np.ndarray:
    p = net.params
    return np.array([p.a, p.b, p.c, p.c_ini, p.y_thresh, p.steps_per_timestep,
                     p.last_spike_init, p.theta_s], dtype=np.float64)


def pack_mem(net: Network) -> np.ndarray:
    m = net.memristor
    return np.array([m.r_on, m.r_off, m.beta, m.mem_lifetime], dtype=np.float64)


def compile_network(net: Network) -> CompiledNet:
    n = net.n_neurons
    sign = np.array([float(net.polarity_of(i)) for i in range(n)])
    pos = [k for k, c in enumerate(net.connections) if c.enabled]
    conns = [net.connections[k] for k in pos]
    pre = np.array([c.pre for c in conns], dtype=np.int64)
    post = np.array([c.post for c in conns], dtype=np.int64)
    kind = np.array([int(c.kind) for c in conns], dtype=np.int64)
    delay = np.array([c.delay for c in conns], dtype=np.int64)
    q = np.array([c.q for c in conns], dtype=np.float64)
    w = np.array([c.weight for c in conns], dtype=np.float64)
    order = np.argsort(pre, kind="stable")
    counts = np.bincount(pre, minlength=n) if len(pre) else np.zeros(n, dtype=np.int64)
    out_start = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    var_conn = np.flatnonzero(kind != CONST).astype(np.int64)
    return CompiledNet(net.n_hidden, sign, pre, post, kind, delay, q, w,
                       out_start, order.astype(np.int64), var_conn,
                       np.array(pos, dtype=np.int64))


@numba.njit(cache=True, inline="always", error_model="numpy")
def _deliver(i, now, sign, post, delay, w, out_start, out_conn, buf, cur):
    D = buf.shape[0]
    s = sign[i]
    for k in range(out_start[i], out_start[i + 1]):
        e = out_conn[k]
        if delay[e] > 0:
            buf[(now + delay[e]) % D, post[e]] += s * w[e]
        else:
            cur[post[e]] += s * w[e]


@numba.njit(cache=True, inline="always", error_model="numpy")
def _snn_step(now, sensors, n_hidden, sign, pre, post, kind, delay, w, q,
              out_start, out_conn, var_conn, y, ls, buf, cur, spk, window,
              snn, mem, counts):
    """One network step; returns the number of spiking neurons (in ``spk``)."""
    a, b, c, thr = snn[_P_A], snn[_P_B], snn[_P_C], snn[_P_THR]
    D = buf.shape[0]
    slot = now % D
    nsp = 0
    for i in range(N_INPUTS):
        v = y[i] + sensors[i] + a - b * y[i]
        if v < 0.0:
            v = 0.0
        if v > thr:
            y[i] = c
            spk[nsp] = i
            nsp += 1
            _deliver(i, now, sign, post, delay, w, out_start, out_conn, buf, cur)
        else:
            y[i] = v
    first_o = N_INPUTS + n_hidden
    for i in range(N_INPUTS, first_o):
        drive = buf[slot, i] + cur[i]
        buf[slot, i] = 0.0
        v = y[i] + drive + a - b * y[i]
        if v < 0.0:
            v = 0.0
        if v > thr:
            y[i] = c
            spk[nsp] = i
            nsp += 1
            _deliver(i, now, sign, post, delay, w, out_start, out_conn, buf, cur)
        else:
            y[i] = v
    for o in range(N_OUTPUTS):
        i = first_o + o
        v = y[i] + cur[i] + a - b * y[i]
        if v < 0.0:
            v = 0.0
        if v > thr:
            y[i] = c
            spk[nsp] = i
            nsp += 1
            window[o] += 1
        else:
            y[i] = v
    lsinit = int(snn[_P_LS])
    for k in range(nsp):
        ls[spk[k]] = lsinit
    theta = int(snn[_P_THETA])
    r_on, r_off, beta, life = mem[0], mem[1], mem[2], mem[3]
    qmax = _q_max(r_on, r_off, beta)
    dq = qmax / life
    # an event needs ls_pre + ls_post > theta, so both ends must hold at
    # least theta + 1 - lsinit; only edges leaving such neurons can fire
    lo = theta + 1 - lsinit
    # equal counters never fire, so a synchronous active set is skipped
    amin, amax = lsinit + 1, -1
    for i in range(y.shape[0]):
        if ls[i] >= lo:
            amin = min(amin, ls[i])
            amax = max(amax, ls[i])
    if var_conn.shape[0] == 0 or amax <= amin:
        amax = -1
    for i in range(y.shape[0] if amax >= 0 else 0):
        if ls[i] < lo:
            continue
        for k in range(out_start[i], out_start[i + 1]):
            e = out_conn[k]
            if kind[e] == CONST:
                continue
            s = _stdp_delta(ls[i], ls[post[e]], theta)
            if s != 0:
                q[e] = _apply_dq(q[e], s, dq, qmax)
                w[e] = _weight(kind[e], q[e], r_on, r_off, beta, qmax)
                if s > 0:
                    counts[kind[e], 0] += 1
                else:
                    counts[kind[e], 1] += 1
    for i in range(y.shape[0]):
        if ls[i] > 0:
            ls[i] -= 1
        cur[i] = 0.0
    return nsp


def _state(cn: CompiledNet, snn: np.ndarray):
    n = cn.sign.shape[0]
    depth = max(int(cn.delay.max()) if cn.delay.size else 0, 0) + 1
    y = np.full(n, snn[_P_CINI])
    ls = np.zeros(n, dtype=np.int64)
    buf = np.zeros((depth, n))
    cur = np.zeros(n)
    spk = np.zeros(n, dtype=np.int64)
    return y, ls, buf, cur, spk


@numba.njit(cache=True, error_model="numpy")
def _snn_run(sensor_steps, n_hidden, sign, pre, post, kind, delay, w, q,
             out_start, out_conn, var_conn, y, ls, buf, cur, spk, snn, mem,
             raster, counts):
    window = np.zeros(2, dtype=np.int64)
    for now in range(sensor_steps.shape[0]):
        nsp = _snn_step(now, sensor_steps[now], n_hidden, sign, pre, post, kind,
                        delay, w, q, out_start, out_conn, var_conn, y, ls, buf,
                        cur, spk, window, snn, mem, counts)
        for k in range(nsp):
            raster[now, spk[k]] = True


def run_steps(net: Network, sensor_steps: np.ndarray):
    """Run raw steps on a freshly reset copy of ``net``'s arrays.

    Returns ``(raster, y, q)`` where ``raster[s, i]`` is True when neuron ``i``
    spiked at step ``s`` and ``q`` follows genome order of enabled connections.
    """
    cn = compile_network(net)
    snn = pack_snn(net)
    y, ls, buf, cur, spk = _state(cn, snn)
    sensor_steps = np.ascontiguousarray(sensor_steps, dtype=np.float64)
    raster = np.zeros((sensor_steps.shape[0], cn.sign.shape[0]), dtype=np.bool_)
    counts = np.zeros((4, 2), dtype=np.int64)
    q, w = cn.q.copy(), cn.w.copy()
    _snn_run(sensor_steps, cn.n_hidden, cn.sign, cn.pre, cn.post, cn.kind,
             cn.delay, w, q, cn.out_start, cn.out_conn, cn.var_conn, y, ls,
             buf, cur, spk, snn, pack_mem(net), raster, counts)
    return raster, y, q


@numba.njit(cache=True, error_model="numpy")
def _trial(n_hidden, sign, pre, post, kind, delay, w, q, out_start, out_conn,
           var_conn, y, ls, buf, cur, spk, snn, mem, arena, dynamic, noisy,
           slip_u, ir_mult, light_mult, x, yy, h, max_t, log):
    steps = int(snn[_P_STEPS])
    sensors = np.zeros(6)
    ones = np.ones(3)
    window = np.zeros(2, dtype=np.int64)
    counts = np.zeros((4, 2), dtype=np.int64)
    half = steps / 2.0
    goal_line = arena[_A_GOAL]
    penalty = int(arena[_A_PEN])
    st = 0
    best = 0.0
    goal = False
    rewards = 0
    phase1_t = -1
    bumps = 0
    now = 0
    t_used = 0
    for t in range(max_t):
        if noisy:
            _sense(x, yy, h, arena, ir_mult[t], light_mult[t], sensors)
        else:
            _sense(x, yy, h, arena, ones, ones, sensors)
        window[0] = 0
        window[1] = 0
        counts[:, :] = 0
        for s in range(steps):
            _snn_step(now, sensors, n_hidden, sign, pre, post, kind, delay, w, q,
                      out_start, out_conn, var_conn, y, ls, buf, cur, spk,
                      window, snn, mem, counts)
            now += 1
        high0 = window[0] >= half
        high1 = window[1] >= half
        if high0 == high1:
            action = 0
        elif high0:
            action = 1
        else:
            action = 2
        slipped = noisy and slip_u[t] < arena[_A_SLIP]
        x, yy, h = _move(x, yy, h, action, slipped, arena)
        st += 1
        left, right = _bumps(x, yy, h, arena)
        if left or right:
            x, yy = _reverse(x, yy, h, arena)
            st += penalty
            bumps += 1
        t_used = t + 1
        done = False
        if dynamic:
            if rewards == 0 and x + yy >= goal_line:
                rewards = 1
                phase1_t = t_used
            elif rewards == 1 and yy - x >= goal_line:
                rewards = 2
                done = True
            f = float(rewards)
            best = f
            goal = rewards > 0
        else:
            reached = x + yy >= goal_line
            f = _fitness(x, yy, st, reached, arena)
            if f > best:
                best = f
            if reached:
                goal = True
                done = True
        if log.shape[0] > 0:
            row = log[t]
            row[0] = t_used
            row[1] = x
            row[2] = yy
            row[3] = h
            row[4] = action
            row[5] = f
            for k in range(3):
                row[6 + 2 * k] = counts[k, 0]
                row[7 + 2 * k] = counts[k, 1]
                tot = 0.0
                n = 0
                for e in range(kind.shape[0]):
                    if kind[e] == k:
                        tot += w[e]
                        n += 1
                row[12 + k] = tot / n if n > 0 else np.nan
        if done:
            break
    return best, t_used, st, goal, rewards, phase1_t, bumps


def run_trial(net: Network, arena: ArenaConfig = ArenaConfig(),
              scenario: Scenario = Scenario.STATIC, seed: int = 0,
              log: bool = False, max_timesteps: Optional[int] = None) -> TrialResult:
    max_t = arena.max_timesteps if max_timesteps is None else max_timesteps
    net.reset_state(reset_weights=True)
    cn = compile_network(net)
    snn = pack_snn(net)
    y, ls, buf, cur, spk = _state(cn, snn)
    pose, slip, ir, light = trial_noise(arena, scenario, seed, max_t)
    dynamic = scenario is Scenario.DYNAMIC
    log_arr = np.full((max_t if log else 0, len(LOG_COLUMNS)), np.nan)
    best, t_used, st, goal, rewards, phase1_t, bumps = _trial(
        cn.n_hidden, cn.sign, cn.pre, cn.post, cn.kind, cn.delay, cn.w.copy(),
        cn.q.copy(), cn.out_start, cn.out_conn, cn.var_conn, y, ls, buf, cur,
        spk, snn, pack_mem(net), arena.packed(), dynamic, dynamic, slip, ir,
        light, pose.x, pose.y, pose.heading, max_t, log_arr)
    return TrialResult(fitness=float(best), timesteps=int(t_used), st=int(st),
                       goal=bool(goal), rewards=int(rewards),
                       phase1_timestep=int(phase1_t), bumps=int(bumps),
                       log=log_arr[:t_used] if log else None)
