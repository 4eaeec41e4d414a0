"""Independent slow re-implementations used as test oracles.

These are written directly from the model definitions with plain Python
floats and lists, sharing no code with the package beyond data classes.
"""
from __future__ import annotations

R_ON, R_OFF, BETA = 0.01, 1.0, 100.0
Q_MAX = (R_ON - R_OFF) / (-R_ON * R_OFF * BETA)
DQ = Q_MAX / 1000


def stdp_sign(ls_pre, ls_post, theta=4):
    if ls_pre + ls_post <= theta or ls_pre == ls_post:
        return 0
    return 1 if ls_pre < ls_post else -1


def q_walk(q, signs):
    for s in signs:
        q = min(max(q + s * DQ, 0.0), Q_MAX)
    return q


def weight_of(kind, q):
    m = min(max(R_OFF - R_OFF * R_ON * BETA * q, R_ON), R_OFF)
    if kind == 0:
        return R_ON / m
    if kind == 1:
        return (R_OFF - m) / (R_OFF + R_ON - m)
    return q / Q_MAX


def tonic_table(steps=21, y=0.5, a=0.3, b=0.05):
    """Unconnected LIF neuron: list of (y after step, spiked)."""
    out = []
    for _ in range(steps):
        y = max(y + a - b * y, 0.0)
        if y > 1.0:
            out.append((0.0, True))
            y = 0.0
        else:
            out.append((y, False))
    return out


def event_list_run(net, sensor_steps):
    """Spike raster from an explicit pending-event list.

    Every spike on an enabled connection becomes an event ``(due, target,
    signed weight)``; events with zero delay are due in the same step.  Layers
    update in order (inputs, hidden ascending, outputs) and each neuron sums
    its due delayed events in emission order before same-step input.
    """
    n_in, n_h = 6, net.n_hidden
    n = n_in + n_h + 2
    sign = [1.0] * n
    for j, p in enumerate(net.hidden_polarity):
        sign[n_in + j] = float(p)
    conns = [[c.pre, c.post, int(c.kind), c.q, c.weight, c.delay]
             for c in net.connections if c.enabled]
    y = [0.5] * n
    ls = [0] * n
    pending = []  # (due, target, value), in emission order
    raster = []
    for now, sensors in enumerate(sensor_steps):
        spiked = []
        same_step = [0.0] * n

        def integrate(i, drive):
            v = max(y[i] + drive + 0.3 - 0.05 * y[i], 0.0)
            if v > 1.0:
                y[i] = 0.0
                spiked.append(i)
                for c in conns:
                    if c[0] == i:
                        if c[5] == 0:
                            same_step[c[1]] += sign[i] * c[4]
                        else:
                            pending.append((now + c[5], c[1], sign[i] * c[4]))
            else:
                y[i] = v

        for i in range(n_in):
            integrate(i, float(sensors[i]))
        due = [e for e in pending if e[0] == now]
        pending[:] = [e for e in pending if e[0] != now]
        for i in range(n_in, n_in + n_h):
            drive = 0.0
            for _, tgt, val in due:
                if tgt == i:
                    drive += val
            integrate(i, drive + same_step[i])
        for i in range(n_in + n_h, n):
            integrate(i, same_step[i])
        for i in spiked:
            ls[i] = 3
        for c in conns:
            if c[2] == 3:
                continue
            s = stdp_sign(ls[c[0]], ls[c[1]])
            if s:
                c[3] = min(max(c[3] + s * DQ, 0.0), Q_MAX)
                c[4] = weight_of(c[2], c[3])
        for i in range(n):
            ls[i] = max(ls[i] - 1, 0)
        raster.append(sorted(spiked))
    return raster, y, [c[3] for c in conns]
