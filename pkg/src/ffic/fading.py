"""Fading power-gain models and their logarithmic Jensen's gap.

A fading model stores the law of the squared channel magnitude
``W = |g|^2`` together with its mean power ``E[W]`` (the SNR or INR of a
link in linear scale).  The quantity certified throughout this package is

    xi(a) = log2(a + E[W]) - E[log2(a + W)],    a >= 0,

which is nonnegative (Jensen), non-increasing in ``a``, and therefore
maximal at ``a = 0``.  The model's logarithmic Jensen's gap is xi(0) =
log2(E[W]) - E[log2 W]; it is scale invariant, so the closed-form bounds
below do not depend on the mean power.  A distribution with an atom at
zero has an infinite gap and is rejected.

Closed-form upper bounds on the gap:

* Gamma shape ``k``:    log2(e)/k - log2(1 + 1/(2k))
* Weibull shape ``k``:  euler_gamma*log2(e)/k + log2(Gamma(1 + 1/k))
* Rayleigh:             the smaller of the two k = 1 values (0.83)
* Deterministic:        0

Nakagami-m magnitude fading makes the power gain Gamma distributed with
shape k = m, so it is covered by the Gamma family; its gap depends on m
rather than being a single constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .mc import EstimateResult, McConfig, estimate_expectation

__all__ = [
    "FadingModel",
    "TabulatedPdf",
    "ComplexGainSampler",
    "JensenGapNumeric",
    "NoClosedFormError",
    "InfiniteJensenGapError",
    "sample_power",
    "expected_log_shifted",
    "jensen_gap_closed_form",
    "jensen_gap_numeric",
    "log_moment_lower_bound",
    "default_xi_grid",
]

LOG2E = math.log2(math.e)
EULER_GAMMA = float(np.euler_gamma)

_SHAPES = ("rayleigh", "gamma", "weibull", "deterministic", "tabulated")

_NORMALIZATION_TOL = 1e-6
_QUAD_TOL = 1e-6  # stated accuracy of the quadrature backend


class NoClosedFormError(ValueError):
    """The shape has no closed-form Jensen-gap bound."""


class InfiniteJensenGapError(ValueError):
    """The model has (or may have) a divergent log moment, i.e. an infinite gap."""


@dataclass(frozen=True)
class TabulatedPdf:
    """Piecewise-linear density of W on a finite grid.

    ``envelope = (a, b)`` declares ``f(w) <= a * w**(b-1)`` on the first
    grid cell.  The envelope is required whenever the grid starts at zero:
    it is what guarantees a finite E[ln W] (the CDF then grows like a
    polynomial near 0, so no mass behaves like an atom at the origin).
    """

    ws: tuple[float, ...]
    fs: tuple[float, ...]
    envelope: tuple[float, float] | None = None

    def __post_init__(self):
        ws = tuple(float(w) for w in self.ws)
        fs = tuple(float(f) for f in self.fs)
        object.__setattr__(self, "ws", ws)
        object.__setattr__(self, "fs", fs)
        if len(ws) != len(fs) or len(ws) < 2:
            raise ValueError("need matching (w, f(w)) grids with at least 2 points")
        w = np.asarray(ws)
        f = np.asarray(fs)
        if w[0] < 0 or np.any(np.diff(w) <= 0):
            raise ValueError("grid must be nonnegative and strictly increasing")
        if np.any(f < 0):
            raise ValueError("pdf values must be nonnegative")
        total = float(np.trapezoid(f, w))
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(
                f"tabulated pdf must integrate to 1 within {_NORMALIZATION_TOL:g}, "
                f"got {total!r}"
            )
        if w[0] == 0.0:
            self._check_envelope()

    def _check_envelope(self):
        if self.envelope is None:
            raise InfiniteJensenGapError(
                "infinite logarithmic Jensen's gap: a tabulated pdf whose grid "
                "starts at w=0 may hide a point mass at 0; declare an "
                "envelope (a, b) with f(w) <= a*w**(b-1) on the first cell"
            )
        a, b = self.envelope
        if a < 0 or b <= 0:
            raise ValueError("envelope requires a >= 0 and b > 0")
        w0, w1 = self.ws[0], self.ws[1]
        f0, f1 = self.fs[0], self.fs[1]
        # Pointwise check of the linear interpolant on a refinement of the
        # first cell; w = 0 itself is checked only when the envelope is
        # finite there.
        ts = np.linspace(0.0, 1.0, 65)
        wchk = w0 + ts * (w1 - w0)
        fchk = f0 + ts * (f1 - f0)
        with np.errstate(divide="ignore"):
            env = a * np.power(wchk, b - 1.0)
        env[wchk == 0.0] = np.inf if b < 1.0 else (a if b == 1.0 else 0.0)
        if np.any(fchk > env * (1.0 + 1e-12) + 1e-300):
            raise InfiniteJensenGapError(
                "infinite logarithmic Jensen's gap: tabulated pdf exceeds its "
                "declared a*w**(b-1) envelope near w=0 (point-mass-like behavior)"
            )

    # -- exact piecewise integration ------------------------------------

    def expect(self, fn, order: int = 16) -> float:
        """Integral of fn(w) f(w) dw by per-cell Gauss-Legendre."""
        x, wt = np.polynomial.legendre.leggauss(order)
        w = np.asarray(self.ws)
        f = np.asarray(self.fs)
        lo, hi = w[:-1], w[1:]
        mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
        nodes = mid[:, None] + half[:, None] * x[None, :]
        slope = (f[1:] - f[:-1]) / (hi - lo)
        dens = f[:-1, None] + slope[:, None] * (nodes - lo[:, None])
        vals = fn(nodes) * dens
        return float(np.sum(half[:, None] * wt[None, :] * vals))

    @property
    def mean(self) -> float:
        return self.expect(lambda w: w)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws from the piecewise-linear density."""
        w = np.asarray(self.ws)
        f = np.asarray(self.fs)
        h = np.diff(w)
        mass = (f[:-1] + f[1:]) * h / 2.0
        cum = np.concatenate([[0.0], np.cumsum(mass)])
        total = cum[-1]
        u = rng.random(size) * total
        cell = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, len(h) - 1)
        r = u - cum[cell]  # residual mass inside the cell
        f0 = f[:-1][cell]
        slope = (f[1:] - f[:-1])[cell] / h[cell]
        # Solve f0*t + slope*t^2/2 = r for the offset t in [0, h].
        lin = np.abs(slope) < 1e-300
        t = np.empty_like(r)
        t[lin] = r[lin] / np.maximum(f0[lin], 1e-300)
        disc = np.maximum(f0[~lin] ** 2 + 2.0 * slope[~lin] * r[~lin], 0.0)
        t[~lin] = (np.sqrt(disc) - f0[~lin]) / slope[~lin]
        return w[:-1][cell] + np.clip(t, 0.0, h[cell])


@dataclass(frozen=True)
class FadingModel:
    """Distribution of a link's power gain W = |g|^2 with mean ``mean_power``."""

    shape: str
    mean_power: float
    k: float | None = None
    table: TabulatedPdf | None = None

    def __post_init__(self):
        if self.shape not in _SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}, expected one of {_SHAPES}")
        if not (self.mean_power > 0 and math.isfinite(self.mean_power)):
            raise ValueError(f"mean_power must be positive, got {self.mean_power}")
        if self.shape in ("gamma", "weibull"):
            if self.k is None or not self.k > 0:
                raise ValueError(f"{self.shape} shape requires k > 0")
        if self.shape == "rayleigh":
            object.__setattr__(self, "k", 1.0)  # stored as Gamma(k=1) internally
        if self.shape == "tabulated":
            if self.table is None:
                raise ValueError("tabulated shape requires a TabulatedPdf")
            if not math.isclose(self.table.mean, self.mean_power, rel_tol=1e-9):
                raise ValueError("mean_power must equal the tabulated mean")

    # -- constructors ----------------------------------------------------

    @classmethod
    def rayleigh(cls, mean_power: float = 1.0) -> "FadingModel":
        return cls("rayleigh", mean_power)

    @classmethod
    def gamma(cls, k: float, mean_power: float = 1.0) -> "FadingModel":
        return cls("gamma", mean_power, k=k)

    @classmethod
    def weibull(cls, k: float, mean_power: float = 1.0) -> "FadingModel":
        return cls("weibull", mean_power, k=k)

    @classmethod
    def deterministic(cls, mean_power: float) -> "FadingModel":
        return cls("deterministic", mean_power)

    @classmethod
    def tabulated(
        cls,
        ws: Sequence[float],
        fs: Sequence[float],
        envelope: tuple[float, float] | None = None,
    ) -> "FadingModel":
        table = TabulatedPdf(tuple(ws), tuple(fs), envelope)
        return cls("tabulated", table.mean, table=table)

    # -- distribution parameters -----------------------------------------

    @property
    def gamma_scale(self) -> float:
        return self.mean_power / self.k

    @property
    def weibull_scale(self) -> float:
        return self.mean_power / math.gamma(1.0 + 1.0 / self.k)

    def sample_power(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """i.i.d. draws of W."""
        if self.shape in ("rayleigh", "gamma"):
            return rng.gamma(self.k, self.gamma_scale, size)
        if self.shape == "weibull":
            return self.weibull_scale * rng.weibull(self.k, size)
        if self.shape == "deterministic":
            return np.full(size, self.mean_power)
        return self.table.sample(rng, size)

    # -- serialization (CLI config format) --------------------------------

    def to_json(self) -> dict:
        out = {"shape": self.shape, "mean_power": self.mean_power}
        if self.shape in ("gamma", "weibull"):
            out["k"] = self.k
        if self.shape == "tabulated":
            out["ws"] = list(self.table.ws)
            out["fs"] = list(self.table.fs)
            out["envelope"] = (
                None if self.table.envelope is None else list(self.table.envelope)
            )
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FadingModel":
        shape = obj["shape"]
        if shape == "tabulated":
            env = obj.get("envelope")
            return cls.tabulated(obj["ws"], obj["fs"], None if env is None else tuple(env))
        if shape in ("gamma", "weibull"):
            return cls(shape, obj["mean_power"], k=obj["k"])
        return cls(shape, obj["mean_power"])


@dataclass(frozen=True)
class ComplexGainSampler:
    """Complex gain g with |g|^2 ~ model and phase uniform on [0, 2pi).

    ``phase="zero"`` gives real nonnegative gains sqrt(W); used for the
    deterministic plug-in channels where the static formulas assume real
    gains.
    """

    model: FadingModel
    phase: str = "uniform"

    def __post_init__(self):
        if self.phase not in ("uniform", "zero"):
            raise ValueError(f"phase must be 'uniform' or 'zero', got {self.phase!r}")

    @property
    def mean_power(self) -> float:
        return self.model.mean_power

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        w = self.model.sample_power(rng, size)
        amp = np.sqrt(w)
        if self.phase == "zero":
            return amp.astype(np.complex128)
        phi = rng.uniform(0.0, 2.0 * np.pi, size)
        return amp * np.exp(1j * phi)


def sample_power(model: FadingModel, rng: np.random.Generator, size: int = 1):
    """One (or ``size``) i.i.d. draw(s) of W."""
    return model.sample_power(rng, size)


# ---------------------------------------------------------------------------
# E[log2(a + W)]
# ---------------------------------------------------------------------------


def _quad_split(f, split: float) -> float:
    # Adaptive scheme on [0, inf) split at the (standardized) mean; the
    # split keeps the integrable ln singularity at 0 in its own panel.
    v1, _ = quad(f, 0.0, split, epsabs=1e-10, epsrel=1e-10, limit=300)
    v2, _ = quad(f, split, np.inf, epsabs=1e-10, epsrel=1e-10, limit=300)
    return v1 + v2


def _elog2_gamma(a: float, k: float, scale: float) -> float:
    # Standardized variable x = w/scale keeps the tail well-conditioned for
    # any mean power (direct integration loses the tail beyond ~1e5).
    lognorm = gammaln(k)

    def f(x):
        return math.log2(a + scale * x) * math.exp((k - 1.0) * math.log(x) - x - lognorm)

    return _quad_split(f, k)


def _elog2_weibull(a: float, k: float, scale: float) -> float:
    # W = scale * y^(1/k) with y ~ Exp(1).
    def f(y):
        return math.log2(a + scale * y ** (1.0 / k)) * math.exp(-y)

    return _quad_split(f, 1.0)


def expected_log_shifted(
    model: FadingModel,
    a: float,
    method: str = "quadrature",
    cfg: McConfig | None = None,
) -> EstimateResult:
    """Estimate of ``E[log2(a + W)]`` in bits.

    Quadrature results carry ``stderr=0`` and are accurate to 1e-6;
    tabulated models fall back to Monte Carlo (the adaptive scheme is for
    the parametric families), as does ``method="mc"``.
    """
    if a < 0:
        raise ValueError(f"shift a must be nonnegative, got {a}")
    if method not in ("quadrature", "mc"):
        raise ValueError(f"method must be 'quadrature' or 'mc', got {method!r}")

    if model.shape == "deterministic":
        return EstimateResult(math.log2(a + model.mean_power), 0.0, 0, 0)

    use_mc = method == "mc" or model.shape == "tabulated"
    if use_mc:
        cfg = cfg or McConfig()
        sampler = ComplexGainSampler(model)
        g2 = lambda g: np.log2(a + g.real**2 + g.imag**2)
        return estimate_expectation(g2, [sampler], cfg)

    if model.shape in ("rayleigh", "gamma"):
        mean = _elog2_gamma(a, model.k, model.gamma_scale)
    else:
        mean = _elog2_weibull(a, model.k, model.weibull_scale)
    return EstimateResult(mean, 0.0, 0, 0)


# ---------------------------------------------------------------------------
# Logarithmic Jensen's gap
# ---------------------------------------------------------------------------


def _gamma_gap_bound(k: float) -> float:
    return LOG2E / k - math.log2(1.0 + 1.0 / (2.0 * k))


def _weibull_gap_bound(k: float) -> float:
    return EULER_GAMMA * LOG2E / k + math.log2(math.gamma(1.0 + 1.0 / k))


def jensen_gap_closed_form(model: FadingModel) -> float:
    """Closed-form upper bound on the gap, independent of mean power.

    Rayleigh admits both the Gamma(k=1) and Weibull(k=1) bounds; the
    tighter Weibull value (0.83) is returned.
    """
    if model.shape == "deterministic":
        return 0.0
    if model.shape == "rayleigh":
        return min(_gamma_gap_bound(1.0), _weibull_gap_bound(1.0))
    if model.shape == "gamma":
        return _gamma_gap_bound(model.k)
    if model.shape == "weibull":
        return _weibull_gap_bound(model.k)
    raise NoClosedFormError(f"no closed form for shape {model.shape!r}")


def default_xi_grid(mean_power: float) -> np.ndarray:
    """a = 0 plus 41 log-spaced points spanning 1e-3..1e3 times the mean."""
    grid = np.geomspace(1e-3 * mean_power, 1e3 * mean_power, 41)
    return np.concatenate([[0.0], grid])


@dataclass(frozen=True)
class JensenGapNumeric:
    """Numeric gap at a=0 together with the xi(a) curve used to verify it."""

    gap_at_zero: float
    gap_stderr: float
    xi_curve: tuple[tuple[float, float], ...]
    xi_stderr: tuple[float, ...]


def jensen_gap_numeric(
    model: FadingModel,
    a_grid: Sequence[float] | None = None,
    cfg: McConfig | None = None,
) -> JensenGapNumeric:
    """Compute xi(a) on a grid and the gap xi(0) = log2(E W) - E[log2 W].

    The curve is how callers certify that the supremum sits at a = 0
    (xi is non-increasing).  Models whose log moment could diverge, i.e.
    anything point-mass-like at 0, are rejected with
    ``InfiniteJensenGapError`` at construction time.
    """
    grid = default_xi_grid(model.mean_power) if a_grid is None else np.asarray(
        a_grid, dtype=float
    )
    if np.any(grid < 0):
        raise ValueError("a grid must be nonnegative")
    if 0.0 not in grid:
        grid = np.concatenate([[0.0], grid])

    xi: list[tuple[float, float]] = []
    errs: list[float] = []
    gap0 = None
    for a in grid:
        est = expected_log_shifted(model, float(a), cfg=cfg)
        val = math.log2(a + model.mean_power) - est.mean
        xi.append((float(a), val))
        errs.append(est.stderr)
        if a == 0.0:
            gap0 = (val, est.stderr)
    return JensenGapNumeric(
        gap_at_zero=gap0[0],
        gap_stderr=gap0[1],
        xi_curve=tuple(xi),
        xi_stderr=tuple(errs),
    )


def log_moment_lower_bound(a: float, b: float, eps: float) -> float:
    """Lower bound on E[ln W] (nats) for any W with CDF <= a*w**b on [0, eps].

    Equals ``ln(eps) + a*eps**b*ln(eps) - a*eps**b/b``; a polynomially
    growing CDF near 0 keeps f(w) ln(w) integrable, so the log moment is
    finite and the Jensen gap of such a model is finite too.
    """
    if a < 0:
        raise ValueError(f"need a >= 0, got {a}")
    if b <= 0:
        raise ValueError(f"need b > 0, got {b}")
    if not 0 < eps <= 1:
        raise ValueError(f"need 0 < eps <= 1, got {eps}")
    ab = a * eps**b
    return math.log(eps) + ab * math.log(eps) - ab / b
