"""Rate regions for the 2-user fast-fading interference channel.

Each region is a finite intersection of half-planes ``c1*R1 + c2*R2 <=
bound`` whose bounds are expectations over the four link gains, evaluated
with the seeded Monte Carlo engine (deterministic channels therefore come
out exact, with zero standard error).  The module certifies the
constant-gap results numerically:

* no feedback:      outer - inner gap  <=  c_JG + 1   bits/use
* feedback:         outer - inner gap  <=  c_JG + 2   bits/use
* interference MAC: outer - inner gap  <=  1 + c_JG/2 bits/use
* fading vs static plug-in (per-rate, per constraint):
                    within 2*c_JG (no feedback) / 3*c_JG (feedback)

where c_JG is the fading model's logarithmic Jensen's gap.  The gap of a
region pair is measured at the outer region's vertices: the smallest
diagonal shift (clamped to the nonnegative orthant) that lands every
vertex inside the inner region.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .fading import ComplexGainSampler, FadingModel
from .mc import McConfig, estimate_expectation

__all__ = [
    "ChannelSpec",
    "SplitParams",
    "RateConstraint",
    "RateRegion",
    "RegionGap",
    "SweepRow",
    "nofb_inner",
    "nofb_outer",
    "nofb_achievable",
    "fb_inner",
    "fb_outer",
    "imac_regions",
    "static_equivalent",
    "region_gap",
    "symmetric_sweep",
]

REGION_KINDS = (
    "nofb_inner",
    "nofb_outer",
    "nofb_achievable",
    "fb_inner",
    "fb_outer",
    "imac_inner",
    "imac_outer",
    "static_inner",
    "static_outer",
    "nphase_outer_sym",
)

# Disjoint substream families so inner/outer bounds of the same run never
# share draws (keeps paired-difference standard errors honest).
_KIND_STREAM = {kind: 16 + i for i, kind in enumerate(REGION_KINDS)}

_GEOM_TOL = 1e-9


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelSpec:
    """The four links of a 2-user IC.

    ``gij`` is the gain from transmitter i to receiver j, so receiver 1
    sees (g11, g21) and receiver 2 sees (g22, g12).  Mean powers:
    SNR1 = E|g11|^2, SNR2 = E|g22|^2, INR1 = E|g12|^2, INR2 = E|g21|^2.
    Links are mutually independent.
    """

    g11: ComplexGainSampler
    g21: ComplexGainSampler
    g22: ComplexGainSampler
    g12: ComplexGainSampler

    @property
    def snr1(self) -> float:
        return self.g11.mean_power

    @property
    def snr2(self) -> float:
        return self.g22.mean_power

    @property
    def inr1(self) -> float:
        return self.g12.mean_power

    @property
    def inr2(self) -> float:
        return self.g21.mean_power

    @classmethod
    def symmetric(
        cls,
        snr: float,
        inr: float,
        shape: str = "rayleigh",
        k: float | None = None,
        phase: str = "uniform",
    ) -> "ChannelSpec":
        """g11 ~ g22 and g12 ~ g21, all independent."""
        direct = _make_model(shape, snr, k)
        cross = _make_model(shape, inr, k)
        return cls(
            g11=ComplexGainSampler(direct, phase),
            g21=ComplexGainSampler(cross, phase),
            g22=ComplexGainSampler(direct, phase),
            g12=ComplexGainSampler(cross, phase),
        )

    @classmethod
    def from_mean_powers(
        cls,
        snr1: float,
        snr2: float,
        inr1: float,
        inr2: float,
        shape: str = "rayleigh",
        k: float | None = None,
        phase: str = "uniform",
    ) -> "ChannelSpec":
        return cls(
            g11=ComplexGainSampler(_make_model(shape, snr1, k), phase),
            g21=ComplexGainSampler(_make_model(shape, inr2, k), phase),
            g22=ComplexGainSampler(_make_model(shape, snr2, k), phase),
            g12=ComplexGainSampler(_make_model(shape, inr1, k), phase),
        )

    def is_symmetric(self) -> bool:
        return self.g11.model == self.g22.model and self.g12.model == self.g21.model

    def deterministic_equivalent(self) -> "ChannelSpec":
        """Static channel with the same mean powers and real gains."""
        return ChannelSpec(
            g11=ComplexGainSampler(FadingModel.deterministic(self.snr1), "zero"),
            g21=ComplexGainSampler(FadingModel.deterministic(self.inr2), "zero"),
            g22=ComplexGainSampler(FadingModel.deterministic(self.snr2), "zero"),
            g12=ComplexGainSampler(FadingModel.deterministic(self.inr1), "zero"),
        )


def _make_model(shape: str, mean_power: float, k: float | None) -> FadingModel:
    if shape == "rayleigh":
        return FadingModel.rayleigh(mean_power)
    if shape == "gamma":
        return FadingModel.gamma(k, mean_power)
    if shape == "weibull":
        return FadingModel.weibull(k, mean_power)
    if shape == "deterministic":
        return FadingModel.deterministic(mean_power)
    raise ValueError(f"unsupported shape for a channel spec: {shape!r}")


@dataclass(frozen=True)
class SplitParams:
    """Power split of each transmitter between private and common parts.

    Private power is matched to the average interference caused at the
    unintended receiver: lambda_pk = min(1/INR_k, 1) without feedback and
    min(1/INR_k, 1 - rho_mag^2) with feedback, where rho_mag is the
    magnitude of the transmit correlation and theta the rotation applied
    by transmitter 1.
    """

    lambda_p1: float
    lambda_p2: float
    rho_mag: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        for lam in (self.lambda_p1, self.lambda_p2):
            if not 0.0 <= lam <= 1.0:
                raise ValueError(f"power split fractions must lie in [0, 1], got {lam}")
        if not 0.0 <= self.rho_mag <= 1.0:
            raise ValueError(f"rho_mag must lie in [0, 1], got {self.rho_mag}")
        if not 0.0 <= self.theta < 2.0 * math.pi:
            raise ValueError(f"theta must lie in [0, 2pi), got {self.theta}")

    @classmethod
    def no_feedback(cls, ch: ChannelSpec) -> "SplitParams":
        return cls(min(1.0 / ch.inr1, 1.0), min(1.0 / ch.inr2, 1.0))

    @classmethod
    def feedback(cls, ch: ChannelSpec, rho_mag: float, theta: float = 0.0) -> "SplitParams":
        common = 1.0 - rho_mag**2
        return cls(
            min(1.0 / ch.inr1, common),
            min(1.0 / ch.inr2, common),
            rho_mag=rho_mag,
            theta=theta,
        )

    def check_feedback_consistency(self, ch: ChannelSpec) -> None:
        want = SplitParams.feedback(ch, self.rho_mag, self.theta)
        ok = math.isclose(self.lambda_p1, want.lambda_p1, rel_tol=1e-12, abs_tol=1e-15) and \
            math.isclose(self.lambda_p2, want.lambda_p2, rel_tol=1e-12, abs_tol=1e-15)
        if not ok:
            raise ValueError(
                "inconsistent split: lambda_pk must equal min(1/INR_k, 1-rho_mag^2)"
            )

    def to_json(self) -> dict:
        return {
            "lambda_p1": self.lambda_p1,
            "lambda_p2": self.lambda_p2,
            "rho_mag": self.rho_mag,
            "theta": self.theta,
        }


_RATE_WEIGHTS = {(1, 0), (0, 1), (1, 1), (2, 1), (1, 2)}


@dataclass(frozen=True)
class RateConstraint:
    """Half-plane c1*R1 + c2*R2 <= bound (bits per channel use)."""

    c1: int
    c2: int
    bound: float
    bound_stderr: float
    label: str

    def __post_init__(self):
        if (self.c1, self.c2) not in _RATE_WEIGHTS:
            raise ValueError(
                f"(c1, c2) must be one of {sorted(_RATE_WEIGHTS)}, "
                f"got ({self.c1}, {self.c2})"
            )
        if self.bound_stderr < 0:
            raise ValueError("bound_stderr must be nonnegative")

    @property
    def weight(self) -> int:
        """Per-rate normalization: the number of rate units bounded."""
        return self.c1 + self.c2

    @property
    def clamped_bound(self) -> float:
        """Bounds can dip below zero at low SNR; rates cannot."""
        return max(self.bound, 0.0)

    def to_json(self) -> dict:
        return {
            "c1": self.c1,
            "c2": self.c2,
            "bound": self.bound,
            "stderr": self.bound_stderr,
            "label": self.label,
        }


@dataclass(frozen=True)
class RateRegion:
    """Intersection of rate constraints with the nonnegative orthant."""

    kind: str
    constraints: tuple[RateConstraint, ...]
    params: SplitParams | None = None
    rho: complex | None = None  # transmit correlation of a feedback outer bound

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        labels = [c.label for c in self.constraints]
        if len(set(labels)) != len(labels):
            raise ValueError("constraint labels must be unique within a region")

    def constraint(self, label: str) -> RateConstraint:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def contains(self, r1: float, r2: float, stderr_mult: float = 0.0) -> bool:
        return all(
            c.c1 * r1 + c.c2 * r2
            <= c.clamped_bound + stderr_mult * c.bound_stderr + _GEOM_TOL
            for c in self.constraints
        )

    def vertices(self) -> list[tuple[float, float]]:
        """Corner points of the clamped region (pairwise intersections)."""
        rows = [(float(c.c1), float(c.c2), c.clamped_bound) for c in self.constraints]
        rows += [(-1.0, 0.0, 0.0), (0.0, -1.0, 0.0)]
        scale = max(1.0, max(abs(b) for _, _, b in rows))
        pts: list[tuple[float, float]] = []
        for i in range(len(rows)):
            a1, b1, c1 = rows[i]
            for j in range(i + 1, len(rows)):
                a2, b2, c2 = rows[j]
                det = a1 * b2 - a2 * b1
                if abs(det) < 1e-12:
                    continue
                x = (c1 * b2 - c2 * b1) / det
                y = (a1 * c2 - a2 * c1) / det
                if all(a * x + b * y <= c + _GEOM_TOL * scale for a, b, c in rows):
                    pts.append((x, y))
        # dedupe
        out: list[tuple[float, float]] = []
        for p in pts:
            if not any(
                abs(p[0] - q[0]) <= _GEOM_TOL * scale and abs(p[1] - q[1]) <= _GEOM_TOL * scale
                for q in out
            ):
                out.append(p)
        centroid = (
            sum(p[0] for p in out) / len(out),
            sum(p[1] for p in out) / len(out),
        )
        out.sort(key=lambda p: math.atan2(p[1] - centroid[1], p[0] - centroid[0]))
        return out

    def symmetric_rate(self) -> float:
        """Largest R with (R, R) in the region."""
        r = min(c.clamped_bound / c.weight for c in self.constraints)
        return max(r, 0.0)

    def max_stderr(self) -> float:
        return max(c.bound_stderr for c in self.constraints)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "params": None if self.params is None else self.params.to_json(),
            "constraints": [c.to_json() for c in self.constraints],
        }
        if self.rho is not None:
            out["rho"] = {"re": self.rho.real, "im": self.rho.imag}
        return out


# ---------------------------------------------------------------------------
# Constraint evaluation
# ---------------------------------------------------------------------------


def _m2(g: np.ndarray) -> np.ndarray:
    return g.real**2 + g.imag**2


_L = np.log2

# A constraint definition: (c1, c2, label, [(links, integrand), ...], const).
_TermList = list[tuple[tuple[str, ...], Callable[..., np.ndarray]]]


def _build_region(
    kind: str,
    ch: ChannelSpec,
    defs: Sequence[tuple[int, int, str, _TermList, float]],
    cfg: McConfig,
    params: SplitParams | None = None,
    rho: complex | None = None,
) -> RateRegion:
    family = _KIND_STREAM[kind]
    constraints = []
    for ci, (c1, c2, label, terms, const) in enumerate(defs):
        total, var = const, 0.0
        for tj, (links, fn) in enumerate(terms):
            samplers = [getattr(ch, name) for name in links]
            est = estimate_expectation(fn, samplers, cfg, stream_key=(family, ci, tj))
            total += est.mean
            var += est.stderr**2
        constraints.append(
            RateConstraint(c1, c2, total, math.sqrt(var), label)
        )
    return RateRegion(kind=kind, constraints=tuple(constraints), params=params, rho=rho)


def nofb_inner(ch: ChannelSpec, cfg: McConfig | None = None) -> RateRegion:
    """Rate-splitting inner bound without feedback (7 constraints).

    Private power is lambda_pk = min(1/INR_k, 1); each log term's residual
    private-interference penalty is replaced by its worst-case value of one
    bit, which is what makes the constants -1/-2/-3 appear.
    """
    cfg = cfg or McConfig()
    sp = SplitParams.no_feedback(ch)
    l1, l2 = sp.lambda_p1, sp.lambda_p2
    defs = [
        (1, 0, "inner_nofb1",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + l2 * _m2(b)))], -1.0),
        (0, 1, "inner_nofb2",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + l1 * _m2(b)))], -1.0),
        (1, 1, "inner_nofb3",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b)))], -2.0),
        (1, 1, "inner_nofb4",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b)))], -2.0),
        (1, 1, "inner_nofb5",
         [(("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + _m2(b)))], -2.0),
        (2, 1, "inner_nofb6",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b)))], -3.0),
        (1, 2, "inner_nofb7",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b)))], -3.0),
    ]
    return _build_region("nofb_inner", ch, defs, cfg, params=sp)


def nofb_achievable(ch: ChannelSpec, cfg: McConfig | None = None) -> RateRegion:
    """Non-feedback inner bound with exact private-interference penalties.

    Identical to :func:`nofb_inner` except that each worst-cased one-bit
    penalty is kept as the exact term E[log2(1 + lambda_pk |g|^2)] <= 1.
    This is the variant plotted in symmetric-rate sweeps; it contains the
    -1/-2/-3 region.
    """
    cfg = cfg or McConfig()
    sp = SplitParams.no_feedback(ch)
    l1, l2 = sp.lambda_p1, sp.lambda_p2
    # Penalty integrands: residual private interference at each receiver.
    pen1 = (("g21",), lambda b: -_L(1 + l2 * _m2(b)))  # at receiver 1
    pen2 = (("g12",), lambda b: -_L(1 + l1 * _m2(b)))  # at receiver 2
    defs = [
        (1, 0, "inner_nofb1",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + l2 * _m2(b))), pen1], 0.0),
        (0, 1, "inner_nofb2",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + l1 * _m2(b))), pen2], 0.0),
        (1, 1, "inner_nofb3",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b))),
          pen1, pen2], 0.0),
        (1, 1, "inner_nofb4",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b))),
          pen1, pen2], 0.0),
        (1, 1, "inner_nofb5",
         [(("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + _m2(b))),
          pen1, pen2], 0.0),
        (2, 1, "inner_nofb6",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b))),
          pen1, pen1, pen2], 0.0),
        (1, 2, "inner_nofb7",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b))),
          pen2, pen2, pen1], 0.0),
    ]
    return _build_region("nofb_achievable", ch, defs, cfg, params=sp)


def nofb_outer(ch: ChannelSpec, cfg: McConfig | None = None) -> RateRegion:
    """Outer bound without feedback (7 constraints, valid even with CSIT)."""
    cfg = cfg or McConfig()
    defs = [
        (1, 0, "outer_nofb1", [(("g11",), lambda a: _L(1 + _m2(a)))], 0.0),
        (0, 1, "outer_nofb2", [(("g22",), lambda a: _L(1 + _m2(a)))], 0.0),
        (1, 1, "outer_nofb3",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g12"), lambda a, b: _L(1 + _m2(a) / (1 + _m2(b))))], 0.0),
        (1, 1, "outer_nofb4",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g22", "g21"), lambda a, b: _L(1 + _m2(a) / (1 + _m2(b))))], 0.0),
        (1, 1, "outer_nofb5",
         [(("g21", "g11", "g12"),
           lambda a, b, c: _L(1 + _m2(a) + _m2(b) / (1 + _m2(c)))),
          (("g12", "g22", "g21"),
           lambda a, b, c: _L(1 + _m2(a) + _m2(b) / (1 + _m2(c))))], 0.0),
        (2, 1, "outer_nofb6",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g12", "g22", "g21"),
           lambda a, b, c: _L(1 + _m2(a) + _m2(b) / (1 + _m2(c)))),
          (("g11", "g12"), lambda a, b: _L(1 + _m2(a) / (1 + _m2(b))))], 0.0),
        (1, 2, "outer_nofb7",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g21", "g11", "g12"),
           lambda a, b, c: _L(1 + _m2(a) + _m2(b) / (1 + _m2(c)))),
          (("g22", "g21"), lambda a, b: _L(1 + _m2(a) / (1 + _m2(b))))], 0.0),
    ]
    return _build_region("nofb_outer", ch, defs, cfg)


def fb_inner(ch: ChannelSpec, sp: SplitParams, cfg: McConfig | None = None) -> RateRegion:
    """Rate-splitting inner bound with feedback (6 constraints).

    Transmitters correlate a common refinement part with magnitude
    ``sp.rho_mag``; transmitter 1 applies the extra rotation ``sp.theta``,
    which is what lets a matched inner point track any outer-bound
    correlation phase.
    """
    cfg = cfg or McConfig()
    sp.check_feedback_consistency(ch)
    l1, l2 = sp.lambda_p1, sp.lambda_p2
    r2 = sp.rho_mag**2
    com = 1.0 - r2
    rot = cmath.exp(1j * sp.theta)

    def coh11(a, b):  # receiver 1 full-power log with coherent part
        cross = 2.0 * r2 * (rot * a * np.conj(b)).real
        return _L(_m2(a) + _m2(b) + cross + 1.0)

    def coh22(a, b):  # receiver 2: Re(e^{i theta} g22* g12)
        cross = 2.0 * r2 * (rot * np.conj(a) * b).real
        return _L(_m2(a) + _m2(b) + cross + 1.0)

    defs = [
        (1, 0, "inner_fb1", [(("g11", "g21"), coh11)], -1.0),
        (1, 0, "inner_fb2",
         [(("g12",), lambda b: _L(1 + com * _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b)))], -2.0),
        (0, 1, "inner_fb3", [(("g22", "g12"), coh22)], -1.0),
        (0, 1, "inner_fb4",
         [(("g21",), lambda b: _L(1 + com * _m2(b))),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b)))], -2.0),
        (1, 1, "inner_fb5",
         [(("g22", "g12"), coh22),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + l2 * _m2(b)))], -2.0),
        (1, 1, "inner_fb6",
         [(("g11", "g21"), coh11),
          (("g22", "g12"), lambda a, b: _L(1 + l2 * _m2(a) + l1 * _m2(b)))], -2.0),
    ]
    return _build_region("fb_inner", ch, defs, cfg, params=sp)


def fb_outer(ch: ChannelSpec, rho: complex, cfg: McConfig | None = None) -> RateRegion:
    """Outer bound with feedback, parameterized by the transmit correlation rho."""
    cfg = cfg or McConfig()
    rho = complex(rho)
    if abs(rho) > 1.0 + 1e-12:
        raise ValueError(f"|rho| must be <= 1, got {abs(rho)}")
    com = max(1.0 - abs(rho) ** 2, 0.0)

    def coh11(a, b):
        return _L(_m2(a) + _m2(b) + 2.0 * (rho * a * np.conj(b)).real + 1.0)

    def coh22(a, b):
        return _L(_m2(a) + _m2(b) + 2.0 * (rho * np.conj(a) * b).real + 1.0)

    def ratio(a, b):  # log2(1 + com*|a|^2 / (1 + com*|b|^2))
        return _L(1 + com * _m2(a) / (1 + com * _m2(b)))

    defs = [
        (1, 0, "outer_fb1", [(("g11", "g21"), coh11)], 0.0),
        (1, 0, "outer_fb2",
         [(("g12",), lambda b: _L(1 + com * _m2(b))),
          (("g11", "g12"), ratio)], 0.0),
        (0, 1, "outer_fb3", [(("g22", "g12"), coh22)], 0.0),
        (0, 1, "outer_fb4",
         [(("g21",), lambda b: _L(1 + com * _m2(b))),
          (("g22", "g21"), ratio)], 0.0),
        (1, 1, "outer_fb5",
         [(("g22", "g12"), coh22),
          (("g11", "g12"), ratio)], 0.0),
        (1, 1, "outer_fb6",
         [(("g11", "g21"), coh11),
          (("g22", "g21"), ratio)], 0.0),
    ]
    return _build_region("fb_outer", ch, defs, cfg, rho=rho)


def imac_regions(
    ch: ChannelSpec, cfg: McConfig | None = None
) -> tuple[RateRegion, RateRegion]:
    """Inner and outer bounds for the interference MAC.

    Receiver 1 decodes both messages, receiver 2 only its own; only
    transmitter 1 splits its power, with lambda_p1 = min(1/INR1, 1).
    """
    cfg = cfg or McConfig()
    sp = SplitParams(min(1.0 / ch.inr1, 1.0), 1.0)
    l1 = sp.lambda_p1
    inner_defs = [
        (1, 0, "inner_IMA1", [(("g11",), lambda a: _L(1 + _m2(a)))], 0.0),
        (0, 1, "inner_IMA2",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + l1 * _m2(b)))], -1.0),
        (0, 1, "inner_IMA3", [(("g21",), lambda a: _L(1 + _m2(a)))], 0.0),
        (1, 1, "inner_IMA4",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b)))], 0.0),
        (1, 1, "inner_IMA5",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11",), lambda a: _L(1 + l1 * _m2(a)))], -1.0),
        (1, 2, "inner_IMA6",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g21"), lambda a, b: _L(1 + l1 * _m2(a) + _m2(b)))], -1.0),
    ]
    outer_defs = [
        (1, 0, "outer_IMA1", [(("g11",), lambda a: _L(1 + _m2(a)))], 0.0),
        (0, 1, "outer_IMA2", [(("g22",), lambda a: _L(1 + _m2(a)))], 0.0),
        (0, 1, "outer_IMA3", [(("g21",), lambda a: _L(1 + _m2(a)))], 0.0),
        (1, 1, "outer_IMA4",
         [(("g11", "g21"), lambda a, b: _L(1 + _m2(a) + _m2(b)))], 0.0),
        (1, 1, "outer_IMA5",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g12"), lambda a, b: _L(1 + _m2(a) / (1 + _m2(b))))], 0.0),
        (1, 2, "outer_IMA6",
         [(("g22", "g12"), lambda a, b: _L(1 + _m2(a) + _m2(b))),
          (("g11", "g12", "g21"),
           lambda a, b, c: _L(1 + _m2(a) / (1 + _m2(b)) + _m2(c)))], 0.0),
    ]
    inner = _build_region("imac_inner", ch, inner_defs, cfg, params=sp)
    outer = _build_region("imac_outer", ch, outer_defs, cfg)
    return inner, outer


def static_equivalent(
    ch: ChannelSpec,
    feedback: bool = False,
    rho_mag: float = 0.0,
    theta: float = 0.0,
    which: str = "inner",
    cfg: McConfig | None = None,
) -> RateRegion:
    """Same constraint templates evaluated on the static plug-in channel.

    The plug-in replaces each link with the deterministic real gain
    sqrt(mean power), so every bound is exact (zero standard error).
    Used to certify that fading only costs a bounded number of bits: each
    fading inner constraint sits within [static - 2*c_JG*(c1+c2), static]
    without feedback, and within 3*c_JG*(c1+c2) with feedback.
    """
    if which not in ("inner", "outer"):
        raise ValueError("which must be 'inner' or 'outer'")
    det = ch.deterministic_equivalent()
    cfg = McConfig(samples=2, seed=(cfg or McConfig()).seed)  # constant integrands
    if feedback:
        if which == "inner":
            region = fb_inner(det, SplitParams.feedback(det, rho_mag, theta), cfg)
        else:
            region = fb_outer(det, rho_mag * cmath.exp(1j * theta), cfg)
    else:
        region = nofb_inner(det, cfg) if which == "inner" else nofb_outer(det, cfg)
    return replace(region, kind="static_inner" if which == "inner" else "static_outer")


# ---------------------------------------------------------------------------
# Gap certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionGap:
    """Distance from an outer region to an inner one.

    ``delta_vertex`` is the largest diagonal shift needed to bring any
    outer vertex (clamped to the nonnegative orthant) into the inner
    region; ``per_constraint`` pairs same-index constraints and divides
    the bound difference by c1+c2, matching how multi-rate constraints
    weight a per-user gap.
    """

    delta_vertex: float
    delta_vertex_stderr: float
    per_constraint: tuple[tuple[str, float, float], ...]

    @property
    def max_weighted_delta(self) -> float:
        return max(d for _, d, _ in self.per_constraint)


_FAMILY = {
    "nofb_inner": "nofb", "nofb_outer": "nofb", "nofb_achievable": "nofb",
    "fb_inner": "fb", "fb_outer": "fb",
    "imac_inner": "imac", "imac_outer": "imac",
    "static_inner": "static", "static_outer": "static",
}


def _trailing_index(label: str) -> int:
    m = re.search(r"(\d+)$", label)
    if not m:
        raise ValueError(f"constraint label {label!r} carries no index")
    return int(m.group(1))


def _shift_to_enter(v: tuple[float, float], c: RateConstraint) -> float:
    """Smallest t >= 0 with clamp(v - t*(1,1)) on the feasible side of c."""
    x, y = v
    bound = c.clamped_bound
    lhs0 = c.c1 * x + c.c2 * y
    if lhs0 <= bound:
        return 0.0
    lo, hi = min(x, y), max(x, y)
    t = (lhs0 - bound) / (c.c1 + c.c2)
    if t <= lo:
        return t
    # smaller coordinate is clamped to zero beyond t = lo
    cw = c.c1 if x >= y else c.c2
    if cw == 0:
        return t  # unreachable for clamped bounds; phase-one crossing
    return hi - bound / cw


def region_gap(outer: RateRegion, inner: RateRegion) -> RegionGap:
    """Certified gap between a matched outer/inner region pair.

    Regions must belong to the same family; a feedback pair must be
    matched, i.e. the inner split uses rho_mag = |rho| and theta =
    arg(rho) of the outer bound.
    """
    fam_o = _FAMILY.get(outer.kind)
    fam_i = _FAMILY.get(inner.kind)
    if fam_o is None or fam_o != fam_i or not outer.kind.endswith("outer"):
        raise ValueError(
            f"mismatched region kinds: {outer.kind!r} vs {inner.kind!r}"
        )
    if fam_o == "fb" and outer.rho is not None and inner.params is not None:
        want_mag = abs(outer.rho)
        want_theta = cmath.phase(outer.rho) % (2.0 * math.pi)
        got_theta = inner.params.theta % (2.0 * math.pi)
        if not (
            math.isclose(inner.params.rho_mag, want_mag, abs_tol=1e-12)
            and (want_mag == 0.0 or math.isclose(got_theta, want_theta, abs_tol=1e-12))
        ):
            raise ValueError(
                "feedback gap needs a matched pair: inner rho_mag = |rho| and "
                "theta = arg(rho) of the outer bound"
            )

    by_index = {_trailing_index(c.label): c for c in inner.constraints}
    per = []
    for oc in outer.constraints:
        ic = by_index[_trailing_index(oc.label)]
        if (oc.c1, oc.c2) != (ic.c1, ic.c2):
            raise ValueError(f"paired constraints disagree on rate weights: {oc.label}")
        delta = (oc.bound - ic.bound) / oc.weight
        se = math.hypot(oc.bound_stderr, ic.bound_stderr) / oc.weight
        per.append((oc.label, delta, se))

    delta_vertex = 0.0
    for v in outer.vertices():
        t = max(_shift_to_enter(v, c) for c in inner.constraints)
        delta_vertex = max(delta_vertex, t)
    se_vertex = math.hypot(outer.max_stderr(), inner.max_stderr())
    return RegionGap(delta_vertex, se_vertex, tuple(per))


# ---------------------------------------------------------------------------
# Symmetric-rate sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    alpha: float
    sym_inner: float
    sym_outer: float
    gap: float


def symmetric_sweep(
    alpha: float,
    snr_db_list: Sequence[float],
    shape: str = "rayleigh",
    cfg: McConfig | None = None,
    k: float | None = None,
) -> list[SweepRow]:
    """Symmetric-rate inner/outer comparison at INR = SNR^alpha.

    The inner curve evaluates the achievable region with exact
    private-interference penalties (the variant the worst-cased constants
    are derived from); the outer curve is the non-feedback outer bound.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    cfg = cfg or McConfig()
    rows = []
    for snr_db in snr_db_list:
        snr = 10.0 ** (snr_db / 10.0)
        inr = snr**alpha
        ch = ChannelSpec.symmetric(snr, inr, shape=shape, k=k)
        sym_inner = nofb_achievable(ch, cfg).symmetric_rate()
        sym_outer = nofb_outer(ch, cfg).symmetric_rate()
        rows.append(SweepRow(snr_db, alpha, sym_inner, sym_outer, sym_outer - sym_inner))
    return rows
