"""Closed-form resource and error estimates for the weak-measurement loop.

All functions are pure and take an explicit :class:`SpectralParams`; nothing
here reads a Hamiltonian. The expressions are implemented as written, even
where their sign conventions look odd (``k_min`` is non-positive for
``F0 < 1``); see the per-function notes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError, ValidationError

QUARTER_PI = math.pi / 4


@dataclass(frozen=True)
class SpectralParams:
    E0: float
    E1: float
    E_th: float
    epsilon: float
    F0: float
    F1: float = 0.0

    def __post_init__(self):
        if self.E0 > self.E1:
            raise ValidationError("E0 must not exceed E1")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        for e in (self.E0, self.E1):
            if self.epsilon * abs(e) > QUARTER_PI * (1 + 1e-12):
                raise ValidationError(f"epsilon*|E| exceeds pi/4 for E={e}")
        if not 0.0 < self.F0 <= 1.0:
            raise ValidationError("F0 must lie in (0, 1]")
        if not 0.0 <= self.F1 < 1.0:
            raise ValidationError("F1 must lie in [0, 1)")
        if self.F0 + self.F1 > 1.0 + 1e-12:
            raise ValidationError("F0 + F1 must not exceed 1")

    @classmethod
    def from_dict(cls, d: dict) -> SpectralParams:
        return cls(**{k: float(d[k]) for k in ("E0", "E1", "E_th", "epsilon", "F0", "F1") if k in d})

    def to_dict(self) -> dict:
        return asdict(self)


def _cos_checked(arg: float) -> float:
    c = math.cos(arg)
    if not 0.0 < c < 1.0:
        raise DomainError(f"cos({arg}) = {c} is outside (0, 1)")
    return c


def k_min(p: SpectralParams) -> float:
    """``ln F0 / (2 ln(1/cos(eps E0 + pi/4)))`` as written (<= 0 for F0 < 1)."""
    q = _cos_checked(p.epsilon * p.E0 + QUARTER_PI)
    return math.log(p.F0) / (2.0 * math.log(1.0 / q))


def k_prime_limit(p: SpectralParams) -> float:
    """Stated degenerate-gap value ``1 / (eps E0 + pi/4)**2``."""
    a = p.epsilon * p.E0 + QUARTER_PI
    if a == 0:
        raise DomainError("eps*E0 + pi/4 vanishes")
    return 1.0 / a**2


def k_prime(p: SpectralParams) -> float:
    """Ratio of log-cosine differences bounding the zeros needed after a one.

    At ``E0 == E1`` the ratio is 0/0 and the stated limit
    :func:`k_prime_limit` is returned. The analytic limit of the ratio is
    ``cot(eps E0 + pi/4)**2``, which differs from the stated value.
    """
    if p.E0 == p.E1:
        return k_prime_limit(p)
    e = p.epsilon
    args = (e * p.E1 - QUARTER_PI, e * p.E0 - QUARTER_PI, e * p.E0 + QUARTER_PI, e * p.E1 + QUARTER_PI)
    for a in args:
        if not -math.pi / 2 < a < math.pi / 2:
            raise DomainError(f"cosine argument {a} outside (-pi/2, pi/2)")
    num = math.log(math.cos(args[0])) - math.log(math.cos(args[1]))
    den = math.log(math.cos(args[2])) - math.log(math.cos(args[3]))
    if den == 0:
        raise DomainError("denominator vanishes")
    return num / den


def t_fail(p: SpectralParams, k_prime_val: float) -> float:
    """Mean length of failed runs: the expanded finite sum over ``k_a``."""
    if k_prime_val < 1:
        raise DomainError("k' must be at least 1")
    q0 = math.cos(p.epsilon * p.E0 + QUARTER_PI) ** 2
    q1 = math.cos(p.epsilon * p.E1 + QUARTER_PI) ** 2
    total = 0.0
    for ka in range(1, math.floor(k_prime_val) + 1):
        total += ka * (
            q0 ** (ka - 1) * p.F0
            + q1 ** (ka - 1) * p.F1
            - q0**ka * p.F0
            - q1**ka * p.F1
        )
    return total


def t_total(p: SpectralParams) -> float:
    """Closed-form worst-case total with ``q = cos(eps E0 + pi/4)``.

    ``(F0 + F1) (1+q)/(1-q) [M q**M - (M+1) q**(M-1) + 1/q] - ln F0 / (2 ln q)``
    with ``M = floor(1 / (eps E0 + pi/4)**2)``.
    """
    a = p.epsilon * p.E0 + QUARTER_PI
    q = _cos_checked(a)
    m = math.floor(1.0 / a**2)
    bracket = m * q**m - (m + 1) * q ** (m - 1) + 1.0 / q
    return (p.F0 + p.F1) * (1 + q) / (1 - q) * bracket - math.log(p.F0) / (2.0 * math.log(q))


def error_exponent_rate(p: SpectralParams) -> float:
    """``2 eps**2 (E0 - E1)(E0 + E1 - 2 E_th)``: d(ln error)/dk."""
    return 2.0 * p.epsilon**2 * (p.E0 - p.E1) * (p.E0 + p.E1 - 2.0 * p.E_th)


def convergence_error(p: SpectralParams, k: int) -> tuple[float, float]:
    """``(F1/F0) exp(k * rate)``; returns (value clamped to [0, 1], raw)."""
    if p.F0 == 0:
        raise DomainError("F0 must be positive")
    if k < 0:
        raise DomainError("k must be non-negative")
    raw = p.F1 / p.F0 * math.exp(k * error_exponent_rate(p))
    return min(max(raw, 0.0), 1.0), raw


def report(p: SpectralParams, k: int = 0) -> dict:
    """All quantities for one parameter set, as a JSON-ready dict."""
    out: dict = {"params": p.to_dict(), "k": k}
    for name, fn in (("k_min", k_min), ("k_prime", k_prime), ("t_total", t_total)):
        try:
            out[name] = fn(p)
        except DomainError as exc:
            out[name] = None
            out[f"{name}_error"] = str(exc)
    kp = out.get("k_prime")
    if kp is not None and kp >= 1:
        out["t_fail"] = t_fail(p, kp)
    else:
        out["t_fail"] = None
    value, raw = convergence_error(p, k)
    out["convergence_error"] = value
    out["convergence_error_raw"] = raw
    return out
