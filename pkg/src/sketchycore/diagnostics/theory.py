"""Error-bound constants and their evaluation on a concrete spectrum.

Range capture (``Q``, ``P``)::

    max(||A - QQ^T A||_F, ||A - A PP^T||_F) <= (C1 + 1) ||S2||_F + C2 ||S2||_2

with ``C1 = sqrt(6 e^2 / p) * k / (k - r + 1) * k^(3 / (k - r + 1))`` and
``C2 = sqrt(36 e^2 / p) * sqrt(k log k) / (k - r + 1) * k^(3 / (k - r + 1))``,
valid for ``k >= r + 4`` with probability at least ``1 - 4/r^3 - 4/k^3``.

Initial and final approximation::

    ||A - Q C P^T||_F  <= C3 ||S2||_F + C4 ||S2||_2
    ||A - [[QCP^T]]_r||_F <= (2 C3 + 1) ||S2||_F + 2 C4 ||S2||_2

with ``C3 = C1 (sqrt(3) C + sqrt(2))``, ``C4 = C2 (sqrt(3) C + sqrt(2))`` and
``C = 6 e^2 / q * s^(1 + 6/(s - k + 1)) / (s - k + 1)^2 * (sqrt(s) + sqrt(6 log s))^2``,
valid for ``s >= k + 4`` with probability at least ``1 - 4/k^3 - 6/s^3``.
``S2`` is the tail of the spectrum beyond rank ``r``; logs are natural.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from ..matcore import InvalidArgumentError
from ..sketch import SketchConfig, ratio_count
from .metrics import IncoherenceStats, SpectrumSummary

E2 = math.e**2


def c1(p: float, k: int, r: int) -> float:
    g = k - r + 1
    return math.sqrt(6 * E2 / p) * k / g * k ** (3 / g)


def c2(p: float, k: int, r: int) -> float:
    g = k - r + 1
    return math.sqrt(36 * E2 / p) * math.sqrt(k * math.log(k)) / g * k ** (3 / g)


def c_core(q: float, s: int, k: int) -> float:
    g = s - k + 1
    return 6 * E2 / q * s ** (1 + 6 / g) / g**2 * (math.sqrt(s) + math.sqrt(6 * math.log(s))) ** 2


@dataclass(frozen=True)
class TheoryReport:
    p: float
    q: float
    s: int
    k: int
    r: int
    C1: float
    C2: float
    Cqsk: float
    C3: float
    C4: float
    probability_floor_range: float
    probability_floor_core: float
    tail_fro: float | None = None
    tail_op: float | None = None
    bound_range: float | None = None
    bound_initial: float | None = None
    bound_final: float | None = None
    sample_counts: tuple[int, int, int, int] | None = None
    sample_floors: tuple[float | None, ...] | None = None
    floors_met: tuple[bool | None, ...] | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check_hypotheses(p, q, s, k, r):
    if r < 1:
        raise InvalidArgumentError(f"r >= 1 violated: r={r}")
    if k < r + 4:
        raise InvalidArgumentError(f"k >= r + 4 violated: k={k}, r={r}")
    if s < k + 4:
        raise InvalidArgumentError(f"s >= k + 4 violated: s={s}, k={k}")
    if not 0 < p <= q <= 1:
        raise InvalidArgumentError(f"0 < p <= q <= 1 violated: p={p}, q={q}")


def theory_constants(p: float, q: float, s: int, k: int, r: int) -> TheoryReport:
    """All five constants and both probability floors; no spectrum needed."""
    p, q, s, k, r = float(p), float(q), int(s), int(k), int(r)
    _check_hypotheses(p, q, s, k, r)
    C1, C2, C = c1(p, k, r), c2(p, k, r), c_core(q, s, k)
    factor = math.sqrt(3) * C + math.sqrt(2)
    return TheoryReport(
        p=p,
        q=q,
        s=s,
        k=k,
        r=r,
        C1=C1,
        C2=C2,
        Cqsk=C,
        C3=C1 * factor,
        C4=C2 * factor,
        probability_floor_range=1 - 4 / r**3 - 4 / k**3,
        probability_floor_core=1 - 4 / k**3 - 6 / s**3,
    )


def evaluate_bounds(spec: SpectrumSummary, inc: IncoherenceStats | None, cfg: SketchConfig) -> TheoryReport:
    """Bound values for ``cfg`` on a matrix with spectrum ``spec``.

    ``sample_floors`` are ``8 mu r log r``, ``8 nu r log r``,
    ``8 mu' k log k`` and ``8 nu' k log k``; ``floors_met`` compares them
    with ``m, n, m', n'``. Entries are ``None`` where the coherence is unknown.
    """
    base = theory_constants(cfg.p, cfg.q, cfg.s, cfg.k, cfg.r)
    r, k = cfg.r, cfg.k
    tf, to = spec.tail_fro(r), spec.tail_op(r)
    counts = (
        ratio_count(cfg.p, spec.M),
        ratio_count(cfg.p, spec.N),
        ratio_count(cfg.q, spec.M),
        ratio_count(cfg.q, spec.N),
    )
    if inc is None:
        inc = IncoherenceStats(None, None)
    lr, lk = r * math.log(r), k * math.log(k)
    coh = (inc.mu, inc.nu, inc.mu_prime, inc.nu_prime)
    scales = (lr, lr, lk, lk)
    floors = tuple(None if c is None else 8 * c * sc for c, sc in zip(coh, scales))
    met = tuple(None if f is None else cnt >= f for f, cnt in zip(floors, counts))
    return dataclasses.replace(
        base,
        tail_fro=tf,
        tail_op=to,
        bound_range=(base.C1 + 1) * tf + base.C2 * to,
        bound_initial=base.C3 * tf + base.C4 * to,
        bound_final=(2 * base.C3 + 1) * tf + 2 * base.C4 * to,
        sample_counts=counts,
        sample_floors=floors,
        floors_met=met,
    )
