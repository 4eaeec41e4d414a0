"""Memristive synapse models and the stepwise-waveform STDP rule.

Three variable connection kinds share one charge state ``q`` in
``[0, q_max]``: an HP-like memristor (sensitive near high weights), a
PEO-PANI-like memristor (sensitive near low weights) and a linear resistor.
A fourth kind, ``CONST``, stores its weight directly and ignores STDP.

The scalar cores (``_memristance``, ``_weight``) are numba-compiled so the
trial kernel in :mod:`memevo.kernel` evaluates exactly the same formulas as
the Python API below.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Optional

import numba

HP, PEO, LIN, CONST = 0, 1, 2, 3


class Kind(enum.IntEnum):
    HP = HP
    PEO = PEO
    LIN = LIN
    CONST = CONST

    @property
    def variable(self) -> bool:
        return self is not Kind.CONST

    @classmethod
    def parse(cls, name: str) -> "Kind":
        return cls[name.upper()]


VARIABLE_KINDS = (Kind.HP, Kind.PEO, Kind.LIN)


@dataclass(frozen=True)
class MemristorParams:
    r_on: float = 0.01
    r_off: float = 1.0
    beta: float = 100.0
    mem_lifetime: int = 1000

    def __post_init__(self):
        if not 0 < self.r_on < self.r_off:
            raise ValueError("need 0 < r_on < r_off")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.mem_lifetime < 1:
            raise ValueError("mem_lifetime must be >= 1")

    @property
    def q_max(self) -> float:
        return q_max(self)

    @property
    def dq(self) -> float:
        """Charge moved by one STDP event."""
        return q_max(self) / self.mem_lifetime


@dataclass
class Connection:
    pre: int
    post: int
    kind: Kind
    enabled: bool = True
    q: float = 0.0
    weight: float = 0.5
    delay: int = 0

    def copy(self) -> "Connection":
        return Connection(self.pre, self.post, self.kind, self.enabled,
                          self.q, self.weight, self.delay)


@dataclass(frozen=True)
class StdpEvent:
    connection: int
    positive: bool
    timestep: int = 0
    step: int = 0


# -- scalar cores ----------------------------------------------------------

@numba.njit(cache=True)
def _q_max(r_on, r_off, beta):
    return (r_on - r_off) / (-r_on * r_off * beta)


@numba.njit(cache=True)
def _memristance(q, r_on, r_off, beta):
    m = r_off - r_off * r_on * beta * q
    # rounding at q == q_max can land a hair outside the device range
    if m < r_on:
        return r_on
    if m > r_off:
        return r_off
    return m


@numba.njit(cache=True)
def _weight(kind, q, r_on, r_off, beta, qmax):
    if kind == HP:
        return r_on / _memristance(q, r_on, r_off, beta)
    if kind == PEO:
        m = _memristance(q, r_on, r_off, beta)
        # 1 - r_on / (r_off + r_on - m), rearranged so q = 0 gives exactly 0
        return (r_off - m) / (r_off + r_on - m)
    return q / qmax


@numba.njit(cache=True)
def _stdp_delta(ls_pre, ls_post, theta):
    """+1 for potentiation, -1 for depression, 0 for no event."""
    if ls_pre + ls_post > theta:
        if ls_pre < ls_post:
            return 1
        if ls_pre > ls_post:
            return -1
    return 0


@numba.njit(cache=True)
def _apply_dq(q, sign, dq, qmax):
    q = q + sign * dq
    if q < 0.0:
        return 0.0
    if q > qmax:
        return qmax
    return q


# -- public API ------------------------------------------------------------

def q_max(p: MemristorParams) -> float:
    value = _q_max(p.r_on, p.r_off, p.beta)
    if value <= 0:
        raise ValueError(f"invalid memristor parameters: q_max={value}")
    return value


def _check_q(q: float, p: MemristorParams) -> None:
    top = q_max(p)
    if not -1e-12 <= q <= top + 1e-12:
        raise ValueError(f"charge {q} outside [0, {top}]")


def memristance(q: float, p: MemristorParams) -> float:
    _check_q(q, p)
    return _memristance(q, p.r_on, p.r_off, p.beta)


def weight_hp(m: float, p: MemristorParams) -> float:
    """Inverse memristance scaled so the fully-on device has weight 1."""
    return p.r_on / m


def weight_peo(m: float, p: MemristorParams) -> float:
    return (p.r_off - m) / (p.r_off + p.r_on - m)


def weight_lin(q: float, p: MemristorParams) -> float:
    _check_q(q, p)
    return q / q_max(p)


def weight(kind: Kind, q: float, p: MemristorParams) -> float:
    """Weight of a variable connection holding charge ``q``."""
    if kind == Kind.CONST:
        raise ValueError("CONST connections have no charge-derived weight")
    _check_q(q, p)
    return _weight(int(kind), q, p.r_on, p.r_off, p.beta, q_max(p))


def weight_range(kind: Kind, p: MemristorParams) -> tuple[float, float]:
    top = q_max(p)
    return weight(kind, 0.0, p), weight(kind, top, p)


def init_q_for_weight(kind: Kind, w0: float = 0.5,
                      p: MemristorParams = MemristorParams()) -> float:
    """Charge at which a variable connection of ``kind`` has weight ``w0``."""
    lo, hi = weight_range(kind, p)
    if not lo - 1e-12 <= w0 <= hi + 1e-12:
        raise ValueError(f"weight {w0} outside {kind.name} range [{lo}, {hi}]")
    top = q_max(p)
    if kind == Kind.HP:
        m = p.r_on / w0
    elif kind == Kind.PEO:
        m = p.r_off + p.r_on - p.r_on / (1.0 - w0)
    elif kind == Kind.LIN:
        return min(max(w0 * top, 0.0), top)
    else:
        raise ValueError("CONST connections carry no charge")
    q = (p.r_off - m) / (p.r_off * p.r_on * p.beta)
    return min(max(q, 0.0), top)


def stdp_update(conn: Connection, ls_pre: int, ls_post: int, theta: int,
                p: MemristorParams) -> Optional[StdpEvent]:
    """Apply one STDP check to ``conn`` in place.

    Returns the event (``positive`` tells the direction) or ``None``.
    CONST and disabled connections are never touched.
    """
    if not conn.enabled or conn.kind == Kind.CONST:
        return None
    sign = _stdp_delta(ls_pre, ls_post, theta)
    if sign == 0:
        return None
    conn.q = _apply_dq(conn.q, sign, p.dq, q_max(p))
    conn.weight = weight(conn.kind, conn.q, p)
    return StdpEvent(connection=-1, positive=sign > 0)


def reset_connection(conn: Connection, p: MemristorParams, w0: float = 0.5) -> Connection:
    if conn.kind != Kind.CONST:
        conn.q = init_q_for_weight(conn.kind, w0, p)
        conn.weight = weight(conn.kind, conn.q, p)
    return conn


def characterize(p: MemristorParams = MemristorParams(),
                 kinds=VARIABLE_KINDS) -> Iterator[tuple[str, int, float, float, float]]:
    """Yield ``(kind, step, q, M, W)`` for ``mem_lifetime`` positive events
    followed by ``mem_lifetime`` negative events, starting from ``q = 0``.

    Step 0 is the untouched device.
    """
    n = p.mem_lifetime
    for kind in kinds:
        conn = Connection(0, 0, kind, q=0.0, weight=weight(kind, 0.0, p))
        yield kind.name, 0, conn.q, memristance(conn.q, p), conn.weight
        for step in range(1, 2 * n + 1):
            if step <= n:
                stdp_update(conn, 2, 3, 4, p)
            else:
                stdp_update(conn, 3, 2, 4, p)
            yield kind.name, step, conn.q, memristance(conn.q, p), conn.weight
