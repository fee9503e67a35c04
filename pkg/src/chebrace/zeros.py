"""Zero-ordinate data for L-functions: synthetic generation and file ingestion.

A ZeroSet holds the positive imaginary parts (ordinates) of the nontrivial
zeros of one character's L-function up to a completeness horizon T_max.
Synthetic sets are drawn from a renewal process whose local rate is the
derivative of the Riemann-von Mangoldt main term, so counting functions,
B0 sums, and partial inverse sums all match the classical asymptotics.
Sampling is sequential with exponential gaps, which models the simplicity
and independence axioms: ordinates are distinct with probability one and
carry no correlation structure.

The one-sided convention (gamma > 0 only) is used throughout; callers that
need the two-sided sum over conjugate pairs double explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
RATE_FLOOR = 1e-6
_SAMPLE_SALT = 0x5CE9A812


class ParseError(ValueError):
    """Malformed zero file content, reported with path and line number."""


class ValidationError(ValueError):
    """Ordinates violating positivity or strict monotonicity."""


class HorizonError(ValueError):
    """Query beyond the completeness horizon T_max."""


@dataclass(frozen=True)
class ZeroCountModel:
    """Counting-function main term N(T) = (T/2pi) log(A (T/2pi e)^deg)."""

    log_conductor: float
    degree_factor: int = 2

    def __post_init__(self) -> None:
        if self.log_conductor < 0:
            raise ValueError(f"log conductor must be >= 0, got {self.log_conductor}")
        if self.degree_factor < 1:
            raise ValueError(f"degree factor must be >= 1, got {self.degree_factor}")

    def rate(self, t: float) -> float:
        """d/dT of the main term: (1/2pi) log(A (t/2pi)^deg)."""
        return (self.log_conductor
                + self.degree_factor * math.log(t / TWO_PI)) / TWO_PI

    @property
    def onset(self) -> float:
        """Height where the local rate crosses zero: 2pi A^(-1/deg)."""
        return TWO_PI * math.exp(-self.log_conductor / self.degree_factor)


def expected_zero_count(model: ZeroCountModel, t: float) -> float:
    """Main-term count of zeros with 0 < gamma <= t, clamped at 0."""
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    main = (t / TWO_PI) * (model.log_conductor
                           + model.degree_factor * (math.log(t / TWO_PI) - 1.0))
    return max(main, 0.0)


@dataclass(frozen=True)
class ZeroSet:
    character_id: str
    t_max: float
    ordinates: tuple[float, ...]
    source: str
    log_conductor: float | None = None

    def __post_init__(self) -> None:
        if self.t_max <= 0:
            raise ValidationError(f"T_max must be positive, got {self.t_max}")
        prev = 0.0
        for k, g in enumerate(self.ordinates):
            if not g > prev:
                raise ValidationError(
                    f"ordinate #{k + 1} = {g!r} not strictly above "
                    f"{'0' if k == 0 else repr(prev)}")
            prev = g
        if self.ordinates and self.ordinates[-1] > self.t_max:
            raise ValidationError(
                f"ordinate {self.ordinates[-1]!r} exceeds T_max = {self.t_max!r}")

    def __len__(self) -> int:
        return len(self.ordinates)


def sample_zero_set(model: ZeroCountModel, t_max: float, seed: int,
                    character_id: str = "unknown") -> ZeroSet:
    """Synthetic ZeroSet on (0, t_max] calibrated to expected_zero_count.

    Exact inhomogeneous Poisson sampling by thinning: exponential gaps at the
    majorant rate (the local rate at t_max, where it peaks), each proposal
    kept with probability local-rate / majorant.  The local rate is the
    derivative of the counting main term, clamped below at a small floor, so
    the counting function matches expected_zero_count up to Poisson noise.
    Independent gaps model the ordinate-independence axiom; ordinates are
    distinct with probability one.  Deterministic per (seed, model, t_max).
    """
    if t_max < 1.0:
        raise ValueError(f"need t_max >= 1, got {t_max}")
    rng = np.random.default_rng(np.random.SeedSequence([_SAMPLE_SALT, seed]))
    log_c, deg = model.log_conductor, model.degree_factor
    majorant = max(model.rate(t_max), RATE_FLOOR)
    kept: list[np.ndarray] = []
    t = 0.0
    while t < t_max:
        gaps = rng.standard_exponential(4096) / majorant
        pts = t + np.cumsum(gaps)
        u = rng.random(pts.size)
        crossed = bool(pts[-1] > t_max)
        if crossed:
            inside = pts <= t_max
            pts, u = pts[inside], u[inside]
        else:
            t = float(pts[-1])
        rates = np.maximum((log_c + deg * np.log(pts / TWO_PI)) / TWO_PI,
                           RATE_FLOOR)
        kept.append(pts[u * majorant < rates])
        if crossed:
            break
    ordinates = np.concatenate(kept) if kept else np.empty(0)
    # cumsum of positive gaps is strictly increasing; drop any float ties
    if ordinates.size:
        keep = np.empty(ordinates.size, dtype=bool)
        keep[0] = ordinates[0] > 0.0
        keep[1:] = np.diff(ordinates) > 0.0
        ordinates = ordinates[keep]
    return ZeroSet(character_id, t_max, tuple(float(g) for g in ordinates),
                   source=f"synthetic({seed})", log_conductor=model.log_conductor)


def b0(zs: ZeroSet, two_sided: bool = False) -> float:
    """Sum of 1/(1/4 + gamma^2) over the stored ordinates.

    Defaults to the one-sided sum over gamma > 0 as used in the variance
    formula; two_sided doubles it to cover the conjugate zeros at -gamma.
    """
    g = np.asarray(zs.ordinates, dtype=float)
    total = float(np.sum(1.0 / (0.25 + g * g))) if g.size else 0.0
    return 2.0 * total if two_sided else total


def partial_inverse_sum(zs: ZeroSet, t: float) -> float:
    """Sum of 1/sqrt(1/4 + gamma^2) over ordinates with gamma <= t."""
    if t > zs.t_max:
        raise HorizonError(f"t = {t!r} beyond completeness horizon {zs.t_max!r}")
    if t < 1.0:
        raise ValueError(f"need t >= 1, got {t}")
    g = np.asarray(zs.ordinates, dtype=float)
    g = g[g <= t]
    return float(np.sum(1.0 / np.sqrt(0.25 + g * g))) if g.size else 0.0


def partial_inverse_main_term(model: ZeroCountModel, t: float) -> float:
    """Analytic main term for partial_inverse_sum on a synthetic set:
    (log t / 2pi) * log(A (sqrt(t)/2pi e)^deg)."""
    return (math.log(t) / TWO_PI) * (
        model.log_conductor
        + model.degree_factor * (0.5 * math.log(t) - math.log(TWO_PI) - 1.0))


def partial_inverse_tolerance(model: ZeroCountModel, t: float) -> float:
    """Tolerance band 5 (1 + log(A (t+4)^deg)) for the main-term comparison."""
    return 5.0 * (1.0 + model.log_conductor
                  + model.degree_factor * math.log(t + 4.0))


def b0_tail(model: ZeroCountModel, t: float) -> float:
    """Main-term estimate of the one-sided sum of 1/(1/4+gamma^2) over
    gamma > t: integral of rate(u)/u^2 du = (rate(t) + deg/2pi)/t."""
    assert t > 0
    return (max(model.rate(t), 0.0) + model.degree_factor / TWO_PI) / t


# -- zero files ----------------------------------------------------------------


def save_zero_file(zs: ZeroSet, path: str) -> None:
    """Decimal text serialization; 17 significant digits round-trip floats."""
    lines = [f"# character: {zs.character_id}", f"# T_max: {zs.t_max:.17g}"]
    if zs.log_conductor is not None:
        lines.append(f"# log_conductor: {zs.log_conductor:.17g}")
    lines.extend(f"{g:.17g}" for g in zs.ordinates)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_zero_file(path: str) -> ZeroSet:
    character_id = "unknown"
    t_max: float | None = None
    log_conductor: float | None = None
    ordinates: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, value = body.partition(":")
                key, value = key.strip(), value.strip()
                if not sep:
                    continue  # plain comment
                if key == "character":
                    character_id = value
                elif key == "T_max":
                    try:
                        t_max = float(value)
                    except ValueError as exc:
                        raise ParseError(f"{path}:{lineno}: bad T_max {value!r}") from exc
                elif key == "log_conductor":
                    try:
                        log_conductor = float(value)
                    except ValueError as exc:
                        raise ParseError(
                            f"{path}:{lineno}: bad log_conductor {value!r}") from exc
                continue
            try:
                g = float(line)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: not a decimal ordinate: "
                                 f"{line!r}") from exc
            if not math.isfinite(g):
                raise ParseError(f"{path}:{lineno}: non-finite ordinate {line!r}")
            if g <= 0:
                raise ValidationError(f"{path}:{lineno}: ordinate must be positive, "
                                      f"got {g!r}")
            if ordinates and g <= ordinates[-1]:
                raise ValidationError(f"{path}:{lineno}: ordinates must be strictly "
                                      f"increasing ({g!r} after {ordinates[-1]!r})")
            ordinates.append(g)
    if t_max is None:
        if not ordinates:
            raise ParseError(f"{path}: empty body and no T_max header")
        t_max = ordinates[-1]
    return ZeroSet(character_id, t_max, tuple(ordinates),
                   source="file", log_conductor=log_conductor)
