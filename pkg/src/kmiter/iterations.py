"""Affine spectral fixed-point iterations and their convergence diagnostics.

Each reconstruction problem in :mod:`kmiter.problems` reduces, mode by mode,
to iterating an affine map

    phi  ->  F(A) phi + z,

where the multiplier function F depends on the family:

* elliptic:    F(lambda) = tanh(lambda T)^2
* hyperbolic:  F(lambda) = cos(lambda T)^2
* parabolic:   F(lambda) = 1 - gamma exp(-lambda^2 T)

All multipliers stay strictly inside (-1, 1) for valid problems, so the map
is non-expansive with the unique fixed point z / (1 - F) per mode, which is
exactly the unknown trace of the underlying problem.  Because F can sit
extremely close to 1, the complement 1 - F is computed and stored in a
cancellation-safe form, and k-step powers go through log1p/expm1 so that
quantities like 1 - F^k remain accurate for k up to 1e9 and beyond.

Closed-form evaluation (geometric sum) and literal stepwise iteration are
both provided; they agree to rounding and the stepwise path exists mainly to
validate the recursion and the stopping rules.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DegenerateComplementError, ModeOverflowError
from .problems import Elliptic, Hyperbolic, Parabolic, ProblemSpec
from .spectral import SpectralVec, SpectrumModel, scale_weights

__all__ = [
    "IterationFactors",
    "StoppingRule",
    "IterationSchedule",
    "CheckpointRecord",
    "IterationReport",
    "ConditionReport",
    "build_factors",
    "default_scale",
    "fixed_point",
    "iterate_closed_form",
    "iterate_stepwise",
    "report_closed_form",
    "run_schedule",
    "check_operator_conditions",
]


# ---------------------------------------------------------------------------
# factors


@dataclasses.dataclass(frozen=True)
class IterationFactors:
    """Per-mode multipliers and affine term of one reconstruction iteration.

    Attributes
    ----------
    kind : str
        One of ``"elliptic"``, ``"hyperbolic"``, ``"parabolic"``.
    factors : ndarray
        F(lambda_j), the per-mode multipliers.
    complements : ndarray
        1 - F(lambda_j), computed without cancellation (sech^2, sin^2, or
        gamma exp(-lambda^2 T) directly).
    z : SpectralVec
        Affine term of the iteration.
    T : float
        Time horizon of the underlying problem.
    gamma : float or None
        Relaxation weight; parabolic only.
    gamma_strict_status : str or None
        Parabolic only.  Whether gamma also satisfies the stricter bound
        gamma < 2 exp(tilde_lambda^2 T) with
        tilde_lambda^2 = lambda_min^2 - ln(2)/T, under which the energy
        inequality with c = 1 is guaranteed: one of ``"holds"``,
        ``"violated"`` (convergence still holds, the inequality is simply
        not guaranteed), or ``"unverified"`` when lambda_min^2 T < ln 2 and
        tilde_lambda is not a real number.
    """

    kind: str
    factors: np.ndarray
    complements: np.ndarray
    z: SpectralVec
    T: float
    gamma: Optional[float] = None
    gamma_strict_status: Optional[str] = None

    @property
    def model(self) -> SpectrumModel:
        return self.z.model


def _elliptic_complement(x: np.ndarray) -> np.ndarray:
    # sech(x)^2 written to stay positive for large x: 4 e^{-2x} / (1+e^{-2x})^2.
    em = np.exp(-x)
    sech = 2.0 * em / (1.0 + em * em)
    return sech * sech


def _sech(x: np.ndarray) -> np.ndarray:
    em = np.exp(-x)
    return 2.0 * em / (1.0 + em * em)


def _strict_gamma_status(gamma: float, lam_min: float, T: float) -> str:
    lam2T = lam_min * lam_min * T
    if lam2T < math.log(2.0):
        return "unverified"
    # 2 exp(tilde^2 T) with tilde^2 = lam_min^2 - ln(2)/T collapses to exp(lam2T).
    limit = math.exp(min(lam2T, 709.0))
    return "holds" if gamma < limit else "violated"


def build_factors(
    spec: ProblemSpec,
    model: Optional[SpectrumModel] = None,
    *,
    z_variant: str = "consistent",
) -> IterationFactors:
    """Assemble the per-mode multipliers F and affine term z for a problem.

    ``model`` defaults to the model the problem data lives over; passing one
    explicitly is only a consistency assertion.

    ``z_variant`` applies to the hyperbolic family only.  The default
    ``"consistent"`` uses z_j = lambda_j sin(lambda_j T) (g_j -
    cos(lambda_j T) f_j), whose fixed point is the initial velocity.  The
    alternative ``"unscaled_g"`` omits the factor lambda_j on the g term;
    that variant appears in some statements of the method but its fixed
    point is not the initial velocity unless f and g are rescaled, so it is
    kept only for side-by-side comparison.
    """
    if model is None:
        model = spec.model
    elif model != spec.model:
        raise ConfigError("explicit model disagrees with the model of the problem data")
    if z_variant not in ("consistent", "unscaled_g"):
        raise ConfigError(f"unknown z_variant {z_variant!r}")
    lam = model.eigenvalues
    T = spec.T

    if isinstance(spec, Elliptic):
        x = lam * T
        th = np.tanh(x)
        sech = _sech(x)
        F = th * th
        comp = sech * sech
        z = lam * th * sech * spec.f.coeffs + sech * spec.g.coeffs
        return IterationFactors(
            kind="elliptic", factors=F, complements=comp,
            z=SpectralVec(z, model), T=T,
        )

    if isinstance(spec, Hyperbolic):
        x = lam * T
        sn, cs = np.sin(x), np.cos(x)
        F = cs * cs
        comp = sn * sn
        g_weight = lam * sn if z_variant == "consistent" else sn
        z = -cs * sn * lam * spec.f.coeffs + g_weight * spec.g.coeffs
        return IterationFactors(
            kind="hyperbolic", factors=F, complements=comp,
            z=SpectralVec(z, model), T=T,
        )

    if isinstance(spec, Parabolic):
        comp = spec.gamma * np.exp(-lam * lam * T)
        F = 1.0 - comp
        z = spec.gamma * spec.f.coeffs
        return IterationFactors(
            kind="parabolic", factors=F, complements=comp,
            z=SpectralVec(z, model), T=T, gamma=spec.gamma,
            gamma_strict_status=_strict_gamma_status(spec.gamma, float(lam[0]), T),
        )

    raise ConfigError(f"unsupported problem type {type(spec).__name__}")


def default_scale(kind: str) -> float:
    """Norm index of the iteration space: -1/2 for elliptic, 0 otherwise."""
    return -0.5 if kind == "elliptic" else 0.0


# ---------------------------------------------------------------------------
# powers of the multiplier, complement-aware


def _pow_with_complement(
    F: np.ndarray, comp: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Return (F^k, 1 - F^k) per mode, accurate also when F is nearly 1.

    For F >= 0, log F = log1p(-comp) keeps full precision out of the stored
    complement, and 1 - F^k = -expm1(k log F).  For F < 0 the magnitude goes
    through log1p(-(1 + F)) (the sum 1 + F is exact in floating point for
    F in [-1, 0]) and the sign follows the parity of k.
    """
    if k < 0:
        raise ConfigError(f"step count must be non-negative, got {k}")
    if k == 0:
        return np.ones_like(F), np.zeros_like(F)
    Fk = np.empty_like(F)
    omFk = np.empty_like(F)

    pos = F >= 0.0
    if np.any(pos):
        with np.errstate(divide="ignore"):
            t = k * np.log1p(-comp[pos])  # log of F^k, in [-inf, 0]
        Fk[pos] = np.exp(t)
        omFk[pos] = -np.expm1(t)

    neg = ~pos
    if np.any(neg):
        with np.errstate(divide="ignore"):
            t = k * np.log1p(-(1.0 + F[neg]))  # log of |F|^k
        mag = np.exp(t)
        if k % 2 == 0:
            Fk[neg] = mag
            omFk[neg] = -np.expm1(t)
        else:
            Fk[neg] = -mag
            omFk[neg] = 1.0 + mag
    return Fk, omFk


# ---------------------------------------------------------------------------
# fixed point and iterates


def fixed_point(fac: IterationFactors) -> SpectralVec:
    """The unique fixed point z / (1 - F) per mode.

    Raises :class:`~kmiter.errors.DegenerateComplementError` on modes where
    the stored complement is exactly zero (the multiplier has rounded to 1;
    no fixed point is representable there) and
    :class:`~kmiter.errors.ModeOverflowError` when the quotient passes the
    1e300 guard.
    """
    comp = fac.complements
    degenerate = np.flatnonzero(comp == 0.0)
    if degenerate.size:
        raise DegenerateComplementError(
            f"1 - F is exactly zero at mode positions {degenerate.tolist()}; "
            "the fixed point does not exist there (consider a spectral cutoff "
            "below those modes)",
            mode_indices=tuple(degenerate.tolist()),
        )
    with np.errstate(over="ignore"):
        c = fac.z.coeffs / comp
    bad = np.flatnonzero(~np.isfinite(c) | (np.abs(c) > 1e300))
    if bad.size:
        raise ModeOverflowError(
            f"fixed point exceeds the 1e300 overflow guard at mode positions {bad.tolist()}",
            mode_indices=tuple(bad.tolist()),
        )
    return SpectralVec(c, fac.model)


def iterate_closed_form(fac: IterationFactors, phi0: SpectralVec, k: int) -> SpectralVec:
    """Exact k-step iterate via the geometric sum, without stepping.

    Per mode, phi_k = F^k phi0 + (1 - F^k)/(1 - F) z; on modes where the
    complement is exactly zero the geometric factor degenerates to k and the
    iterate is phi0 + k z, which is the correct limit.
    """
    if phi0.model != fac.model:
        raise ConfigError("phi0 must live over the model of the factors")
    k = int(k)
    if k == 0:
        return SpectralVec(phi0.coeffs.copy(), fac.model)
    Fk, omFk = _pow_with_complement(fac.factors, fac.complements, k)
    comp = fac.complements
    safe = np.where(comp == 0.0, 1.0, comp)
    geom = np.where(comp == 0.0, float(k), omFk / safe)
    return SpectralVec(Fk * phi0.coeffs + geom * fac.z.coeffs, fac.model)


# ---------------------------------------------------------------------------
# schedules and reports


@dataclasses.dataclass(frozen=True)
class StoppingRule:
    """Termination policy: a hard step budget plus an optional diff tolerance.

    ``successive_diff_tol`` is compared against ||phi_k - phi_{k-1}|| in the
    scale norm of index ``scale`` (``None`` means the default norm of the
    iteration space, -1/2 for elliptic and 0 otherwise); zero disables the
    tolerance and the budget alone terminates the run.
    """

    max_steps: int
    successive_diff_tol: float = 0.0
    scale: Optional[float] = None

    def __post_init__(self):
        if int(self.max_steps) < 1:
            raise ConfigError("max_steps must be at least 1")
        object.__setattr__(self, "max_steps", int(self.max_steps))
        if not (self.successive_diff_tol >= 0.0):
            raise ConfigError("successive_diff_tol must be non-negative")


@dataclasses.dataclass(frozen=True)
class IterationSchedule:
    """Which step counts to record and how to run them.

    ``checkpoints`` must be ascending positive integers; ``mode`` selects the
    closed-form evaluator (default, exact at any k) or the literal stepwise
    recursion.  The stopping rule defaults to a budget equal to the last
    checkpoint.
    """

    checkpoints: tuple[int, ...]
    mode: str = "closed_form"
    stop: Optional[StoppingRule] = None

    def __post_init__(self):
        cps = tuple(int(k) for k in self.checkpoints)
        if len(cps) == 0:
            raise ConfigError("checkpoints must be non-empty")
        if cps[0] < 1 or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError("checkpoints must be strictly ascending and >= 1")
        object.__setattr__(self, "checkpoints", cps)
        if self.mode not in ("closed_form", "stepwise"):
            raise ConfigError(f"unknown schedule mode {self.mode!r}")
        stop = self.stop if self.stop is not None else StoppingRule(max_steps=cps[-1])
        if stop.max_steps < cps[-1]:
            raise ConfigError(
                f"max_steps = {stop.max_steps} is below the last checkpoint {cps[-1]}"
            )
        object.__setattr__(self, "stop", stop)


@dataclasses.dataclass(frozen=True)
class CheckpointRecord:
    """State of the iteration after k steps.

    ``successive_diff`` is ||phi_k - phi_{k-1}|| and ``residual`` is
    ||T phi_k - phi_k||, both in the report's scale norm.
    ``error_vs_reference`` is the L2-relative error against the supplied
    reference trace (absolute if the reference is zero), or None when no
    reference was given.
    """

    k: int
    iterate: SpectralVec
    successive_diff: float
    residual: float
    error_vs_reference: Optional[float] = None


@dataclasses.dataclass(frozen=True)
class IterationReport:
    kind: str
    scale: float
    records: tuple[CheckpointRecord, ...]
    final_k: int
    termination_reason: str  # "max_steps" or "tolerance"


def _scaled_norm(model: SpectrumModel, coeffs: np.ndarray, s: float) -> float:
    if s == 0.0:
        return float(np.linalg.norm(coeffs))
    return float(np.linalg.norm(scale_weights(model, 0.5 * s) * coeffs))


def _rel_error(model, coeffs, ref: Optional[SpectralVec]) -> Optional[float]:
    if ref is None:
        return None
    err = float(np.linalg.norm(coeffs - ref.coeffs))
    base = float(np.linalg.norm(ref.coeffs))
    return err / base if base > 0.0 else err


def iterate_stepwise(
    fac: IterationFactors,
    phi0: SpectralVec,
    schedule: IterationSchedule,
    reference: Optional[SpectralVec] = None,
) -> IterationReport:
    """Run the literal recursion phi <- F phi + z, recording checkpoints.

    Stops early once the successive difference drops below the tolerance
    (when one is set); if the budget and the tolerance trigger on the same
    step, the budget wins and the reason reads ``"max_steps"``.  An exactly
    stationary iterate (diff == 0) always stops, tolerance or not, since
    no further step can change anything.
    """
    if phi0.model != fac.model:
        raise ConfigError("phi0 must live over the model of the factors")
    stop = schedule.stop
    s = stop.scale if stop.scale is not None else default_scale(fac.kind)
    model = fac.model
    F, z = fac.factors, fac.z.coeffs
    wanted = set(schedule.checkpoints)

    records: list[CheckpointRecord] = []

    def snapshot(k, phi, diff):
        records.append(
            CheckpointRecord(
                k=k,
                iterate=SpectralVec(phi.copy(), model),
                successive_diff=diff,
                residual=_scaled_norm(model, (F * phi + z) - phi, s),
                error_vs_reference=_rel_error(model, phi, reference),
            )
        )

    phi = phi0.coeffs.copy()
    final_k = stop.max_steps
    reason = "max_steps"
    for k in range(1, stop.max_steps + 1):
        new = F * phi + z
        diff = _scaled_norm(model, new - phi, s)
        phi = new
        if k in wanted:
            snapshot(k, phi, diff)
        if diff == 0.0 or (
            stop.successive_diff_tol > 0.0 and diff < stop.successive_diff_tol
        ):
            final_k = k
            reason = "max_steps" if k == stop.max_steps else "tolerance"
            if k not in wanted:
                snapshot(k, phi, diff)
            break
    return IterationReport(
        kind=fac.kind, scale=s, records=tuple(records), final_k=final_k,
        termination_reason=reason,
    )


def report_closed_form(
    fac: IterationFactors,
    phi0: SpectralVec,
    schedule: IterationSchedule,
    reference: Optional[SpectralVec] = None,
) -> IterationReport:
    """Same report shape as :func:`iterate_stepwise`, via closed forms.

    Uses the telescoping identity phi_k - phi_{k-1} = F^{k-1} (z - (1-F)
    phi0) so successive differences and residuals come out exact at any k,
    which is what makes million-step tables affordable.  Unlike the
    stepwise runner this one never cuts the schedule short on a diff of
    exactly zero: the analytic per-step difference underflows long before
    the iterate stops improving, and every requested checkpoint is cheap
    to evaluate directly.
    """
    if phi0.model != fac.model:
        raise ConfigError("phi0 must live over the model of the factors")
    stop = schedule.stop
    s = stop.scale if stop.scale is not None else default_scale(fac.kind)
    model = fac.model
    w = fac.z.coeffs - fac.complements * phi0.coeffs  # first-step displacement

    checkpoints = list(schedule.checkpoints)
    if checkpoints[-1] != stop.max_steps:
        checkpoints.append(stop.max_steps)

    records: list[CheckpointRecord] = []
    final_k = stop.max_steps
    reason = "max_steps"
    for k in checkpoints:
        Fkm1, _ = _pow_with_complement(fac.factors, fac.complements, k - 1)
        Fk, _ = _pow_with_complement(fac.factors, fac.complements, k)
        phi = iterate_closed_form(fac, phi0, k)
        diff = _scaled_norm(model, Fkm1 * w, s)
        records.append(
            CheckpointRecord(
                k=k,
                iterate=phi,
                successive_diff=diff,
                residual=_scaled_norm(model, Fk * w, s),
                error_vs_reference=_rel_error(model, phi.coeffs, reference),
            )
        )
        if stop.successive_diff_tol > 0.0 and diff < stop.successive_diff_tol:
            final_k = k
            reason = "max_steps" if k == stop.max_steps else "tolerance"
            break
    return IterationReport(
        kind=fac.kind, scale=s, records=tuple(records), final_k=final_k,
        termination_reason=reason,
    )


def run_schedule(
    fac: IterationFactors,
    phi0: SpectralVec,
    schedule: IterationSchedule,
    reference: Optional[SpectralVec] = None,
) -> IterationReport:
    """Dispatch to the evaluator selected by ``schedule.mode``."""
    if schedule.mode == "stepwise":
        return iterate_stepwise(fac, phi0, schedule, reference)
    return report_closed_form(fac, phi0, schedule, reference)


# ---------------------------------------------------------------------------
# operator-condition checks


@dataclasses.dataclass(frozen=True)
class ConditionReport:
    """Outcome of testing the energy inequalities on sample vectors.

    Condition (1): ||(I-T)x||^2 <= c (||x||^2 - ||Tx||^2).
    Condition (2): <(I-T)x, x>  >= (c+1)/(2c) ||(I-T)x||^2.
    Both are evaluated for the linear part T = F(A) in the scale norm of the
    iteration space.  Violations are signed (positive = inequality broken);
    a condition "holds" when its worst violation stays within ``tol``.
    """

    nonexpansive: bool
    condition1_holds: bool
    condition2_holds: bool
    max_violation: float
    condition1_violation: float
    condition2_violation: float
    nonexpansive_violation: float
    worst_sample: int
    c: float
    scale: float
    tol: float


def check_operator_conditions(
    fac: IterationFactors,
    sample_vectors: Sequence[SpectralVec],
    c: float,
    *,
    scale: Optional[float] = None,
    tol: float = 1e-12,
) -> ConditionReport:
    """Evaluate the two energy inequalities and non-expansivity on samples.

    The constant ``c`` must be positive.  Returns the worst signed violation
    across the samples and all three checks, plus which sample attained it.
    """
    if not sample_vectors:
        raise ConfigError("sample_vectors must be non-empty")
    c = float(c)
    if not (c > 0.0):
        raise ConfigError(f"c must be positive, got {c!r}")
    s = scale if scale is not None else default_scale(fac.kind)
    model = fac.model
    w = scale_weights(model, s)
    F = fac.factors
    comp = fac.complements

    v1 = v2 = vn = -math.inf
    worst = 0
    worst_val = -math.inf
    for i, x in enumerate(sample_vectors):
        if x.model != model:
            raise ConfigError(f"sample {i} lives over a different model")
        xc = x.coeffs
        n2 = float(np.dot(w, xc * xc))
        Tn2 = float(np.dot(w, (F * xc) ** 2))
        dx = comp * xc
        d2 = float(np.dot(w, dx * dx))
        ip = float(np.dot(w, dx * xc))
        viol1 = d2 - c * (n2 - Tn2)
        viol2 = (c + 1.0) / (2.0 * c) * d2 - ip
        violn = math.sqrt(Tn2) - math.sqrt(n2)
        v1, v2, vn = max(v1, viol1), max(v2, viol2), max(vn, violn)
        here = max(viol1, viol2, violn)
        if here > worst_val:
            worst_val, worst = here, i
    return ConditionReport(
        nonexpansive=vn <= tol,
        condition1_holds=v1 <= tol,
        condition2_holds=v2 <= tol,
        max_violation=max(v1, v2, vn),
        condition1_violation=v1,
        condition2_violation=v2,
        nonexpansive_violation=vn,
        worst_sample=worst,
        c=c,
        scale=s,
        tol=tol,
    )
