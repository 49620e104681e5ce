"""Controlled surplus model: claims, reinsurance coefficients, payoff weights, regimes.

All regime indices in the Python API are 0-based.  Surplus dynamics follow the
diffusion approximation of the Cramer-Lundberg model under cheap reinsurance::

    dX = b(alpha, u) dt + sigma(alpha, u) dW - dZ

with ``b = beta * E[Y^u]`` and ``sigma^2 = beta * E[(Y^u)^2]``.

For excess-of-loss cover the diffusion coefficient uses the second truncated
moment ``int_0^u 2x Fbar(x) dx``.  (The compact SDE often quoted for this case
puts the first truncated moment under the square root; the worked examples with
exponential and uniform claims use the second moment, and so do we.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadRegime, BadState, InvalidRetention, OutOfSupport

PROPORTIONAL = "proportional"
EXCESS_OF_LOSS = "excess_of_loss"
REINSURANCE_KINDS = (PROPORTIONAL, EXCESS_OF_LOSS)

ROW_SUM_TOL = 1e-12


# --------------------------------------------------------------------------
# claims


@dataclass(frozen=True)
class ClaimDistribution:
    """Claim-size law described through its survival function ``P(Y > x)``.

    Use the :meth:`exponential`, :meth:`uniform` and :meth:`table`
    constructors rather than filling the fields by hand.  A table is a list of
    ``(x, Fbar(x))`` knots, linearly interpolated, with ``Fbar = 1`` left of
    the first knot.
    """

    kind: str
    rate: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    xs: tuple = ()
    sf: tuple = ()

    @classmethod
    def exponential(cls, rate: float) -> "ClaimDistribution":
        return cls(kind="exponential", rate=float(rate))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "ClaimDistribution":
        return cls(kind="uniform", lo=float(lo), hi=float(hi))

    @classmethod
    def table(cls, xs: Sequence[float], sf: Sequence[float]) -> "ClaimDistribution":
        return cls(kind="table", xs=tuple(float(v) for v in xs), sf=tuple(float(v) for v in sf))

    @property
    def support_max(self) -> float:
        if self.kind == "exponential":
            return math.inf
        if self.kind == "uniform":
            return self.hi
        return self.xs[-1]

    def survival(self, x):
        """Vectorised ``Fbar(x)``."""
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            return np.where(x <= 0.0, 1.0, np.exp(-self.rate * np.maximum(x, 0.0)))
        if self.kind == "uniform":
            return np.clip((self.hi - x) / (self.hi - self.lo), 0.0, 1.0)
        return np.interp(x, self.xs, self.sf, left=1.0, right=self.sf[-1])

    def full_moments(self) -> tuple[float, float]:
        """``(E[Y], E[Y^2])`` without truncation."""
        if self.kind == "exponential":
            return 1.0 / self.rate, 2.0 / self.rate**2
        if self.kind == "uniform":
            lo, hi = self.lo, self.hi
            return 0.5 * (lo + hi), (lo * lo + lo * hi + hi * hi) / 3.0
        return truncated_moments(self, self.xs[-1])

    def violations(self) -> list[str]:
        out = []
        if self.kind == "exponential":
            if not self.rate > 0:
                out.append(f"exponential claim rate must be > 0, got {self.rate:g}")
        elif self.kind == "uniform":
            if not (0.0 <= self.lo < self.hi):
                out.append(f"uniform claim needs 0 <= lo < hi, got [{self.lo:g}, {self.hi:g}]")
        elif self.kind == "table":
            xs, sf = np.asarray(self.xs), np.asarray(self.sf)
            if len(xs) < 2 or len(xs) != len(sf):
                out.append("claim table needs >= 2 (x, Fbar) points of equal length")
                return out
            if xs[0] < 0:
                out.append("claim table x values must be >= 0")
            if np.any(np.diff(xs) <= 0):
                out.append("claim table x values must be strictly increasing")
            if np.any(np.diff(sf) > 0):
                out.append("claim table survival values must be nonincreasing")
            if np.any(sf < 0) or np.any(sf > 1):
                out.append("claim table survival values must lie in [0, 1]")
            if sf[0] != 1.0:
                out.append(f"claim table survival must start at 1, got {sf[0]:g}")
        else:
            out.append(f"unknown claim distribution kind {self.kind!r}")
        return out


def truncated_moments(dist: ClaimDistribution, u: float) -> tuple[float, float]:
    """First and second moments of ``min(Y, u)``.

    Returns ``(int_0^u Fbar, int_0^u 2x Fbar)``.  Closed forms for the
    exponential and uniform laws; composite trapezoid for tables.
    """
    u = float(u)
    if not u >= 0.0:
        raise InvalidRetention(f"retention must be >= 0, got {u!r}")
    if dist.kind == "exponential":
        lam = dist.rate
        e = math.exp(-lam * u)
        m1 = -math.expm1(-lam * u) / lam
        m2 = 2.0 / lam**2 * (1.0 - e * (1.0 + lam * u))
        return m1, max(m2, 0.0)
    if dist.kind == "uniform":
        lo, hi = dist.lo, dist.hi
        if u <= lo:
            return u, u * u
        w = hi - lo
        v = min(u, hi)
        m1 = lo + (w * w - (hi - v) ** 2) / (2.0 * w)
        m2 = lo * lo + (2.0 / w) * (hi * (v * v - lo * lo) / 2.0 - (v**3 - lo**3) / 3.0)
        return m1, m2
    if dist.kind == "table":
        if u > dist.xs[-1] * (1 + 1e-12):
            raise OutOfSupport(f"retention {u:g} beyond claim table support {dist.xs[-1]:g}")
        if u == 0.0:
            return 0.0, 0.0
        knots = np.asarray(dist.xs)
        nodes = np.union1d(np.linspace(0.0, u, 1001), knots[(knots > 0) & (knots < u)])
        sf = dist.survival(nodes)
        return float(np.trapezoid(sf, nodes)), float(np.trapezoid(2.0 * nodes * sf, nodes))
    raise ValueError(f"unknown claim distribution kind {dist.kind!r}")


# --------------------------------------------------------------------------
# regimes, payoff, controls


@dataclass(frozen=True)
class RegimeSet:
    """Generator ``Q`` of the modulating chain and per-regime claim rates."""

    Q: tuple
    beta: tuple

    def __post_init__(self):
        object.__setattr__(self, "Q", tuple(tuple(float(v) for v in row) for row in self.Q))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))

    @property
    def m(self) -> int:
        return len(self.beta)

    @property
    def q(self) -> np.ndarray:
        return np.array(self.Q, dtype=float).reshape(len(self.Q), -1)

    def violations(self) -> list[str]:
        out = []
        m = self.m
        if m < 1:
            out.append("need at least one regime")
            return out
        for i, b in enumerate(self.beta):
            if not b > 0:
                out.append(f"claim rate beta[{i}] must be > 0, got {b:g}")
        if len(self.Q) != m or any(len(row) != m for row in self.Q):
            out.append(f"generator must be {m}x{m} to match beta")
            return out
        for i, row in enumerate(self.Q):
            for j, v in enumerate(row):
                if i != j and v < 0:
                    out.append(f"generator entry ({i}, {j}) is negative: {v:g}")
            s = math.fsum(row)
            if abs(s) > ROW_SUM_TOL:
                out.append(f"generator row {i} sums to {s:.12g}")
        return out


def tabulated_reward(u_points: Sequence[float], values: Sequence[Sequence[float]]) -> Callable:
    """Running reward ``f(x, regime, u)`` interpolated linearly in ``u``.

    ``values[regime]`` holds the reward at each of ``u_points``; ``x`` is
    ignored.
    """
    up = np.asarray(u_points, dtype=float)
    vals = [np.asarray(v, dtype=float) for v in values]

    def f(x, regime, u):
        return np.interp(u, up, vals[regime]) + np.zeros_like(np.asarray(x, dtype=float))

    f.table = (up.tolist(), [v.tolist() for v in vals])
    return f


@dataclass(frozen=True)
class PayoffSpec:
    """Discount rate, dividend weight ``c`` and running reward ``f``.

    ``c_kind`` is ``"constant"`` (weight ``c_value``) or ``"exp_marginal"``
    (``lam * exp(-lam * x)``).  ``f`` is ``None`` for zero running reward, or
    a vectorised callable ``f(x, regime, u)``.
    """

    r: float
    c_kind: str = "constant"
    c_value: float = 1.0
    lam: float = 1.0
    f: Optional[Callable] = field(default=None, compare=False)

    def violations(self) -> list[str]:
        out = []
        if not self.r > 0:
            out.append(f"discount rate r must be > 0, got {self.r:g}")
        if self.c_kind == "constant":
            if not self.c_value >= 0:
                out.append(f"dividend weight must be >= 0, got {self.c_value:g}")
        elif self.c_kind == "exp_marginal":
            if not self.lam > 0:
                out.append(f"marginal-yield lambda must be > 0, got {self.lam:g}")
        else:
            out.append(f"unknown dividend weight kind {self.c_kind!r}")
        return out

    @property
    def c_max(self) -> float:
        return self.c_value if self.c_kind == "constant" else self.lam


def dividend_weight(payoff: PayoffSpec, x, regime: int = 0):
    """Weight ``c(x, regime)`` applied to each unit of dividend paid at surplus ``x``."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise BadState(f"surplus must be >= 0, got {x!r}")
    if payoff.c_kind == "constant":
        out = np.full_like(xa, payoff.c_value)
    else:
        out = payoff.lam * np.exp(-payoff.lam * xa)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ControlSet:
    """Retention levels ``U = [u_min, u_max]`` discretised by ``n_u`` mesh points.

    Setting ``fixed`` freezes the control at one value and overrides the mesh.
    """

    u_min: float = 0.0
    u_max: float = 1.0
    n_u: int = 101
    fixed: Optional[float] = None

    def mesh(self) -> np.ndarray:
        if self.fixed is not None:
            return np.array([float(self.fixed)])
        k = np.arange(self.n_u)
        return self.u_min + k * (self.u_max - self.u_min) / (self.n_u - 1)

    def violations(self) -> list[str]:
        if self.fixed is not None:
            return [] if self.fixed >= 0 else [f"frozen control must be >= 0, got {self.fixed:g}"]
        out = []
        if not (0.0 <= self.u_min < self.u_max):
            out.append(f"control set needs 0 <= u_min < u_max, got [{self.u_min:g}, {self.u_max:g}]")
        if self.n_u < 2:
            out.append("control mesh needs ≥ 2 points")
        return out


# --------------------------------------------------------------------------
# full model


@dataclass(frozen=True)
class ModelSpec:
    reinsurance: str
    claim: ClaimDistribution
    regimes: RegimeSet
    payoff: PayoffSpec
    control: ControlSet = ControlSet()

    @property
    def m(self) -> int:
        return self.regimes.m

    @property
    def r(self) -> float:
        return self.payoff.r

    def drift_vol(self, regime: int, u: float) -> tuple[float, float]:
        return drift_vol(self, regime, u)

    def with_control(self, **changes) -> "ModelSpec":
        from dataclasses import replace

        return replace(self, control=replace(self.control, **changes))


def drift_vol(model: ModelSpec, regime: int, u: float) -> tuple[float, float]:
    """Drift ``b`` and volatility ``sigma`` in ``regime`` at retention ``u``.

    Neither depends on the surplus level, which lets transition kernels be
    cached per ``(regime, u)``.
    """
    if not (0 <= regime < model.m) or int(regime) != regime:
        raise BadRegime(f"regime {regime!r} outside 0..{model.m - 1}")
    beta = model.regimes.beta[regime]
    if model.reinsurance == PROPORTIONAL:
        if not u >= 0:
            raise InvalidRetention(f"retention must be >= 0, got {u!r}")
        ey, ey2 = model.claim.full_moments()
        return beta * u * ey, u * math.sqrt(beta * ey2)
    if model.reinsurance == EXCESS_OF_LOSS:
        m1, m2 = truncated_moments(model.claim, u)
        return beta * m1, math.sqrt(beta * m2)
    raise ValueError(f"unknown reinsurance kind {model.reinsurance!r}")


def validate(model: ModelSpec) -> list[str]:
    """Every invariant violation in ``model``; an empty list means the model is usable."""
    out = []
    if model.reinsurance not in REINSURANCE_KINDS:
        out.append(f"reinsurance must be one of {REINSURANCE_KINDS}, got {model.reinsurance!r}")
    claim_bad = model.claim.violations()
    out += claim_bad
    regime_bad = model.regimes.violations()
    out += regime_bad
    out += model.payoff.violations()
    control_bad = model.control.violations()
    out += control_bad
    if claim_bad or regime_bad or control_bad or model.reinsurance not in REINSURANCE_KINDS:
        return out

    mesh = model.control.mesh()
    if model.reinsurance == EXCESS_OF_LOSS and mesh[-1] > model.claim.support_max:
        if model.claim.kind == "table":
            out.append(
                f"retention {mesh[-1]:g} beyond claim table support {model.claim.support_max:g}"
            )
            return out
    for ell in range(model.m):
        for u in mesh:
            b, s = drift_vol(model, ell, float(u))
            if not (math.isfinite(b) and math.isfinite(s)):
                out.append(f"non-finite coefficients at regime {ell}, u={u:g}")
    return out


# --------------------------------------------------------------------------
# worked examples

EXAMPLE_Q = ((-0.5, 0.5), (0.5, -0.5))
EXAMPLE_BETA = (1.0, 10.0)
EXAMPLE_R = 0.05

# name -> (reinsurance, claim law, u_max).  Exponential claims are unbounded,
# so an excess-of-loss cap of 1 would force heavy reinsurance; the cap mesh for
# that case runs to 10, past which retaining more changes almost nothing.
PRESETS = {
    "prop-exp": (PROPORTIONAL, "exponential", 1.0),
    "prop-unif": (PROPORTIONAL, "uniform", 1.0),
    "xol-exp": (EXCESS_OF_LOSS, "exponential", 10.0),
    "xol-unif": (EXCESS_OF_LOSS, "uniform", 1.0),
}


def example_model(name: str, payoff: str = "dividends", n_u: int = 101) -> ModelSpec:
    """Two-regime model with ``beta = (1, 10)`` and ``r = 0.05``.

    ``name`` is one of :data:`PRESETS`; ``payoff`` is ``"dividends"`` (unit
    weight) or ``"marginal"`` (``exp(-x)`` weight).
    """
    reinsurance, claim_kind, u_max = PRESETS[name]
    claim = (
        ClaimDistribution.exponential(1.0)
        if claim_kind == "exponential"
        else ClaimDistribution.uniform(0.0, 1.0)
    )
    if payoff == "dividends":
        pay = PayoffSpec(r=EXAMPLE_R)
    elif payoff == "marginal":
        pay = PayoffSpec(r=EXAMPLE_R, c_kind="exp_marginal", lam=1.0)
    else:
        raise ValueError(f"unknown payoff variant {payoff!r}")
    return ModelSpec(
        reinsurance=reinsurance,
        claim=claim,
        regimes=RegimeSet(Q=EXAMPLE_Q, beta=EXAMPLE_BETA),
        payoff=pay,
        control=ControlSet(0.0, u_max, n_u),
    )


def pure_singular_model(c_value: float = 1.0) -> ModelSpec:
    """Two-regime model with retention frozen at zero, so ``b = sigma = 0``.

    Only dividend payouts matter; the value function is ``c_value * x``.
    """
    return ModelSpec(
        reinsurance=PROPORTIONAL,
        claim=ClaimDistribution.exponential(1.0),
        regimes=RegimeSet(Q=EXAMPLE_Q, beta=EXAMPLE_BETA),
        payoff=PayoffSpec(r=EXAMPLE_R, c_value=c_value),
        control=ControlSet(fixed=0.0),
    )


def single_regime_model(u: float = 1.0, r: float = EXAMPLE_R) -> ModelSpec:
    """Proportional, unit-rate exponential claims, one regime, control frozen at ``u``.

    With ``u = 1`` the surplus is Brownian motion with drift 1 and variance 2,
    for which the optimal barrier is known in closed form.
    """
    return ModelSpec(
        reinsurance=PROPORTIONAL,
        claim=ClaimDistribution.exponential(1.0),
        regimes=RegimeSet(Q=((0.0,),), beta=(1.0,)),
        payoff=PayoffSpec(r=r),
        control=ControlSet(fixed=u),
    )
