"""Semi-analytical coverage, spatial throughput and critical density.

Coverage of the typical user served by the nearest (smallest-pathloss) base
station, with gamma fading from zero-forcing precoding, is

    CP = E_r0[ sum_{k=0}^{Na-NU} ((-s)^k / k!) d^k/ds^k exp(-eta(s)) ],
    s  = tau / (P l(d0)),   d0 = sqrt(r0^2 + dh^2),

where the interference Laplace exponent and its derivatives are

    eta(s)     = 2 pi lam Int_{d0}^inf x (1 - (1 + s P l(x))^-NU) dx
    eta^(m)(s) = 2 pi lam (-1)^(m+1) (NU)_m
                 Int_{d0}^inf x (P l(x))^m (1 + s P l(x))^(-NU-m) dx.

Each integral is split at the pathloss breakpoints beyond d0: finite
segments go through adaptive quadrature, and the single-slope tail has the
closed hypergeometric form evaluated by ``specfun``.  The derivative sum is
assembled through complete Bell polynomials of the scaled, sign-definite
quantities y_m = (-1)^(m+1) s^m eta^(m), which are all nonnegative, so no
cancellation occurs.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .pathloss import PathlossModel, loss_at
from .specfun import complete_bell, hyp2f1, omega, rising_factorial

# Outer expectation over the serving distance is truncated where the void
# probability exp(-pi lam r^2) drops below this; the discarded mass is at
# most the same amount since the conditional summand is <= 1.
OUTER_TAIL_CUT = 1e-12
OUTER_RTOL = 1e-8
INNER_RTOL = 1e-9

# exp(-eta) underflows the double range near 745; past 400 the contribution
# is below 1e-173 and the Bell factors cannot bring it back to relevance.
ETA_UNDERFLOW = 400.0

# Serving distances this small only occur in the dh = 0 corner of the outer
# quadrature, where the SIR diverges and the summand tends to 1.
D0_FLOOR = 1e-9

GOLDEN_SECTION_RTOL = 0.005


class CoverageNumericError(ArithmeticError):
    """Quadrature failure or a coverage value outside [0, 1]."""


class BracketError(ValueError):
    """The density range does not bracket an interior throughput maximum."""


class ScalingViolationError(ValueError):
    """Fitted decay constant is not positive."""


@dataclass(frozen=True)
class NetworkConfig:
    lambda_bs: float          # base stations per m^2
    power: float              # transmit power, W
    tau: float                # SIR threshold, linear
    delta_h: float            # antenna height difference, m
    n_antennas: int
    n_users: int
    user_density: float | None = None  # documentation only; cells are saturated

    def __post_init__(self):
        if self.lambda_bs <= 0:
            raise ValueError(f"lambda_bs must be positive, got {self.lambda_bs}")
        if self.power <= 0:
            raise ValueError(f"power must be positive, got {self.power}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.delta_h < 0:
            raise ValueError(f"delta_h must be nonnegative, got {self.delta_h}")
        if self.n_antennas < 1 or self.n_users < 1 or self.n_users > self.n_antennas:
            raise ValueError(
                f"need 1 <= n_users <= n_antennas, got "
                f"n_users={self.n_users}, n_antennas={self.n_antennas}"
            )


@dataclass(frozen=True)
class CoverageResult:
    cp: float
    quadrature_error: float
    k_terms: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple                # (lambda_bs, cp, st) triples, lambda ascending
    scheme: str
    config: NetworkConfig

    def __post_init__(self):
        lams = [r[0] for r in self.rows]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("sweep rows must be sorted by ascending density")
        for lam, cp, st in self.rows:
            want = self.config.n_users * lam * cp * math.log2(1.0 + self.config.tau)
            if abs(st - want) > 1e-12 * max(abs(want), 1e-300):
                raise ValueError(f"row at lambda={lam} has inconsistent throughput")


def _quad(func, lo, hi, rtol, points=None):
    """scipy.integrate.quad with an explicit failure signal."""
    out = integrate.quad(
        func, lo, hi, epsabs=1e-15, epsrel=rtol, limit=200, full_output=True,
        points=points,
    )
    if len(out) > 3:
        raise CoverageNumericError(f"quadrature on [{lo}, {hi}] failed: {out[3]}")
    return out[0], out[1]


def laplace_exponent_derivs(cfg: NetworkConfig, model: PathlossModel,
                            d0: float, s: float, max_order: int) -> list:
    """[eta(s), eta'(s), ..., eta^(max_order)(s)] at the given serving distance.

    Finite pathloss segments beyond d0 are integrated adaptively; the
    infinite final-slope piece uses the closed forms

        Int_u^inf x (1-(1+sPl)^-NU) dx = (u^2/2) (omega(NU, a, sPl(u)) - 1)
        Int_u^inf x (Pl)^m (1+sPl)^(-NU-m) dx
            = -(u^2/2) (Pl(u))^m (b)_m/(c)_m 2F1(NU+m, b+m, c+m, -sPl(u))

    with l = K x^-a the final slope, b = -2/a, c = 1 - 2/a.
    """
    if d0 <= 0 or d0 < cfg.delta_h:
        raise ValueError(
            f"serving distance {d0} must be positive and at least delta_h={cfg.delta_h}"
        )
    if s <= 0:
        raise ValueError(f"Laplace argument must be positive, got {s}")
    if max_order < 0:
        raise ValueError(f"max_order must be nonnegative, got {max_order}")

    lam, p, nu = cfg.lambda_bs, cfg.power, cfg.n_users
    tail_from = max(d0, model.last_breakpoint)
    cuts = [d0] + [r for r in model.breakpoints if r > d0]
    segments = list(zip(cuts, cuts[1:]))  # empty when d0 is past the last breakpoint

    alpha = model.final_exponent
    b = -2.0 / alpha
    c = 1.0 - 2.0 / alpha
    pl_u = p * model.final_constant * tail_from ** (-alpha)
    z = s * pl_u
    seg_params = _segment_params(model, cuts)

    out = []
    for m in range(max_order + 1):
        if m == 0:
            total = 0.5 * tail_from ** 2 * (omega(nu, alpha, z) - 1.0)
        else:
            total = (
                -0.5 * tail_from ** 2 * pl_u ** m
                * rising_factorial(b, m) / rising_factorial(c, m)
                * hyp2f1(nu + m, b + m, c + m, -z)
            )
        for (lo, hi), (a_seg, k_seg) in zip(segments, seg_params):
            def integrand(x, a=a_seg, k=k_seg):
                pl = p * k * x ** (-a)
                if m == 0:
                    return x * (1.0 - (1.0 + s * pl) ** (-nu))
                return x * pl ** m * (1.0 + s * pl) ** (-nu - m)
            val, _ = _quad(integrand, lo, hi, INNER_RTOL)
            total += val
        if m == 0:
            out.append(2.0 * math.pi * lam * total)
        else:
            sign = 1.0 if m % 2 else -1.0
            out.append(2.0 * math.pi * lam * sign * rising_factorial(nu, m) * total)
    return out


def _segment_params(model: PathlossModel, cuts):
    """(exponent, constant) of the slope covering each [cuts[i], cuts[i+1])."""
    params = []
    for lo in cuts[:-1]:
        n = 0
        for r in model.breakpoints:
            if lo < r:
                break
            n += 1
        params.append((model.exponents[n], model.constants[n]))
    return params


def _bell_summand(cfg, model, d0, s):
    """sum_{k=0}^{Na-NU} ((-s)^k/k!) d^k/ds^k exp(-eta) at one serving distance.

    By homogeneity of the Bell polynomials this equals
    exp(-eta) sum_k B_k(y_1..y_k)/k! with y_m = (-1)^(m+1) s^m eta^(m) >= 0.
    """
    k_max = cfg.n_antennas - cfg.n_users
    derivs = laplace_exponent_derivs(cfg, model, d0, s, k_max)
    eta = derivs[0]
    if eta > ETA_UNDERFLOW:
        return 0.0
    ys = [(-1.0) ** (m + 1) * s ** m * derivs[m] for m in range(1, k_max + 1)]
    total = 0.0
    fact = 1.0
    for k in range(k_max + 1):
        if k > 0:
            fact *= k
        total += complete_bell(ys, k) / fact
    return math.exp(-eta) * total


def coverage_exact(cfg: NetworkConfig, model: PathlossModel) -> CoverageResult:
    """Semi-analytical coverage probability (the full derivative sum).

    The expectation over the serving distance runs in the substituted
    variable v = pi lam r0^2, truncated at v = -ln(OUTER_TAIL_CUT).
    """
    pi_lam = math.pi * cfg.lambda_bs
    v_max = -math.log(OUTER_TAIL_CUT)

    def integrand(v):
        r0 = math.sqrt(v / pi_lam)
        d0 = math.sqrt(r0 * r0 + cfg.delta_h ** 2)
        if d0 <= D0_FLOOR:
            return math.exp(-v)
        s = cfg.tau / (cfg.power * loss_at(model, d0))
        return math.exp(-v) * _bell_summand(cfg, model, d0, s)

    # Serving distances crossing a breakpoint put a derivative kink in the
    # integrand; hand those locations to the quadrature.
    knots = []
    for r in model.breakpoints:
        if r > cfg.delta_h:
            v = pi_lam * (r * r - cfg.delta_h ** 2)
            if 0.0 < v < v_max:
                knots.append(v)

    cp, err = _quad(integrand, 0.0, v_max, OUTER_RTOL, points=knots or None)
    err += OUTER_TAIL_CUT
    if not (-err - 1e-9 <= cp <= 1.0 + err + 1e-9):
        raise CoverageNumericError(
            f"coverage {cp} outside [0, 1] beyond the error budget {err}"
        )
    return CoverageResult(cp, err, cfg.n_antennas - cfg.n_users + 1)


def coverage_approx(cfg: NetworkConfig, model: PathlossModel) -> CoverageResult:
    """Closed-form single-slope approximation.

    Replaces the serving gain Gamma(Na-NU+1, 1) by an exponential with the
    same mean, giving

        CP ~= exp(-pi lam dh^2 (omega(NU, a0, tauS) - 1)) / omega(NU, a0, tauS)

    with the deflated threshold tauS = tau / (Na - NU + 1).  Exact when
    Na = 1.
    """
    if not model.is_single_slope:
        raise ValueError("the closed-form approximation requires a single-slope model")
    tau_s = cfg.tau / (cfg.n_antennas - cfg.n_users + 1)
    w = omega(cfg.n_users, model.final_exponent, tau_s)
    cp = math.exp(-math.pi * cfg.lambda_bs * cfg.delta_h ** 2 * (w - 1.0)) / w
    return CoverageResult(cp, 0.0, 1)


def coverage_lower_full(cfg: NetworkConfig, model: PathlossModel) -> float:
    """Closed-form lower bound on full-SDMA coverage (N_U = N_a).

    exp(-pi lam (omega(Na, a, tau) (R^2 + dh^2) - dh^2)) / omega(Na, a, tau)
    with a the final exponent and R the last breakpoint.
    """
    if cfg.n_users != cfg.n_antennas:
        raise ValueError(
            f"full-SDMA bound needs n_users == n_antennas, got "
            f"{cfg.n_users} != {cfg.n_antennas}"
        )
    w = omega(cfg.n_antennas, model.final_exponent, cfg.tau)
    r = model.last_breakpoint
    expo = math.pi * cfg.lambda_bs * (w * (r * r + cfg.delta_h ** 2) - cfg.delta_h ** 2)
    return math.exp(-expo) / w


def spatial_throughput(cfg: NetworkConfig, cp: float) -> float:
    """N_U * lambda * CP * log2(1 + tau), bps/Hz per m^2."""
    if not 0.0 <= cp <= 1.0:
        raise ValueError(f"coverage must lie in [0, 1], got {cp}")
    return cfg.n_users * cfg.lambda_bs * cp * math.log2(1.0 + cfg.tau)


def critical_density_closed(cfg: NetworkConfig, alpha0: float) -> float:
    """Closed-form throughput-maximizing density, 1/m^2 (single-slope).

        lambda* = 1 / (pi dh^2 (omega(NU, alpha0, tauS) - 1))

    Returns inf when delta_h = 0: throughput then grows with density and no
    finite critical density exists.
    """
    if cfg.delta_h == 0.0:
        return math.inf
    tau_s = cfg.tau / (cfg.n_antennas - cfg.n_users + 1)
    w = omega(cfg.n_users, alpha0, tau_s)
    return 1.0 / (math.pi * cfg.delta_h ** 2 * (w - 1.0))


def critical_density_numeric(cfg: NetworkConfig, model: PathlossModel,
                             lambda_range, coverage_fn=None) -> float:
    """Golden-section argmax of lambda -> ST(lambda) to 0.5% relative.

    ``coverage_fn`` maps (cfg, model) to a CoverageResult; defaults to
    coverage_exact.  The range must bracket a maximum: throughput has to
    rise at the left edge and fall at the right edge.
    """
    if coverage_fn is None:
        coverage_fn = coverage_exact
    lo, hi = lambda_range
    if not 0 < lo < hi:
        raise ValueError(f"invalid density range ({lo}, {hi})")

    def st_at(lam):
        c = replace(cfg, lambda_bs=lam)
        return spatial_throughput(c, coverage_fn(c, model).cp)

    # Endpoint slope signs establish the bracket.  At the right edge only a
    # *rising* slope disqualifies: coverage can underflow to an exact zero
    # plateau past the peak, where two equal samples are not evidence of a
    # missing maximum.
    eps = 1.02
    if st_at(lo * eps) <= st_at(lo):
        raise BracketError(f"throughput not rising at lambda={lo}; no interior maximum")
    st_hi = st_at(hi)
    if st_hi > st_at(hi / eps) and st_hi > 1e-300:
        raise BracketError(f"throughput still rising at lambda={hi}; no interior maximum")

    # Golden section on log-density.
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c1 = b - inv_phi * (b - a)
    c2 = a + inv_phi * (b - a)
    f1, f2 = st_at(math.exp(c1)), st_at(math.exp(c2))
    while b - a > math.log1p(GOLDEN_SECTION_RTOL):
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - inv_phi * (b - a)
            f1 = st_at(math.exp(c1))
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + inv_phi * (b - a)
            f2 = st_at(math.exp(c2))
    return math.exp(0.5 * (a + b))


def scaling_fit(sweep: SweepResult) -> float:
    """Decay constant kappa of CP ~ exp(-kappa * lambda) on the dense tail.

    Least-squares slope of log CP against lambda over the top density decade
    of the sweep.  A non-positive fit flags a scaling-law violation.
    """
    lam_hi = sweep.rows[-1][0]
    pts = [(lam, cp) for lam, cp, _ in sweep.rows if lam >= lam_hi / 10.0]
    if len(pts) < 3:
        raise ValueError("need at least 3 rows in the top density decade")
    lams = np.array([p[0] for p in pts])
    cps = np.array([p[1] for p in pts])
    if np.any(cps <= 0):
        raise ValueError("coverage must be positive for a log-linear fit")
    slope, _ = np.polyfit(lams, np.log(cps), 1)
    kappa = -float(slope)
    if kappa <= 0:
        raise ScalingViolationError(f"fitted decay constant {kappa} is not positive")
    return kappa
