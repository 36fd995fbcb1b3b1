"""Experiment harness: density sweeps, scheme comparisons and a self-check
command, driven by flat key-value config files and emitting CSV.

Config grammar (see the shipped files under ``configs/``)::

    # comment lines start with '#' or ';'
    [section]
    key = value          # values: numbers, booleans, comma lists

Sections: ``network`` (power_dbm, tau_db, delta_h_m, n_antennas, n_users),
``pathloss`` (exponents, breakpoints_m), ``sweep`` (lambda_min_per_km2,
lambda_max_per_km2, points, log_spaced), ``mc`` (trials, seed, optional
window_radius_m), ``output`` (path) and the optional ``golden`` block of
reference values checked by ``validate``.

Densities are per km^2 at this interface and converted to per m^2 on the way
into the numeric modules; dBm and dB become linear units at parse time.
Throughput columns are bps/Hz/km^2 so every row satisfies
st = n_users * lambda_per_km2 * cp * log2(1 + tau) as written.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numeric
failure.
"""

import argparse
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import analytic, montecarlo
from .analytic import NetworkConfig
from .pathloss import PathlossModel, make_pathloss
from .specfun import omega

CSV_HEADER = (
    "lambda_per_km2,scheme,n_antennas,n_users,"
    "cp_analytic,cp_approx,cp_mc,mc_stderr,st_analytic"
)

M2_PER_KM2 = 1e-6

# Below this many trials a 3-sigma Monte Carlo comparison resolves nothing
# useful, so `validate` reports the check as skipped rather than passed.
MIN_VALIDATE_TRIALS = 10_000


class ConfigError(Exception):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}" if line else f"{path}: {message}")


class NumericFailure(Exception):
    pass


@dataclass
class ExperimentConfig:
    path: str
    power_dbm: float
    tau_db: float
    delta_h_m: float
    n_antennas: int
    n_users_list: tuple
    exponents: tuple
    breakpoints_m: tuple
    lambda_min_per_km2: float
    lambda_max_per_km2: float
    points: int
    log_spaced: bool
    mc_trials: int
    mc_seed: int
    mc_window_radius_m: float | None
    output_path: str
    golden: dict

    @property
    def power_w(self) -> float:
        return 10.0 ** ((self.power_dbm - 30.0) / 10.0)

    @property
    def tau_linear(self) -> float:
        return 10.0 ** (self.tau_db / 10.0)

    def pathloss_model(self) -> PathlossModel:
        return make_pathloss(self.exponents, self.breakpoints_m)

    def network(self, lambda_per_km2: float, n_users: int) -> NetworkConfig:
        return NetworkConfig(
            lambda_bs=lambda_per_km2 * M2_PER_KM2,
            power=self.power_w,
            tau=self.tau_linear,
            delta_h=self.delta_h_m,
            n_antennas=self.n_antennas,
            n_users=n_users,
        )

    def lambda_grid_per_km2(self) -> np.ndarray:
        lo, hi = self.lambda_min_per_km2, self.lambda_max_per_km2
        if self.points == 1:
            return np.array([lo])
        if self.log_spaced:
            return np.logspace(math.log10(lo), math.log10(hi), self.points)
        return np.linspace(lo, hi, self.points)


def _read_sections(path):
    """Parse the flat key-value format; values keep their source line."""
    sections = {}
    current = None
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(path, 0, str(exc)) from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigError(path, lineno, f"expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(path, lineno, "key outside any [section]")
        key, value = (part.strip() for part in line.split("=", 1))
        sections[current][key.lower()] = (value, lineno)
    return sections


class _SectionReader:
    def __init__(self, path, sections, name):
        self.path = path
        self.name = name
        self.data = sections.get(name, {})

    def _raw(self, key, default=...):
        if key in self.data:
            return self.data[key]
        if default is ...:
            raise ConfigError(self.path, 0, f"missing required key [{self.name}] {key}")
        return (default, 0)

    def value_line(self, key):
        return self.data[key][1] if key in self.data else 0

    def parse(self, key, conv, default=..., typename="value"):
        raw, line = self._raw(key, default)
        if raw is None or raw == "":
            if default is not ...:
                return default
            raise ConfigError(self.path, line, f"[{self.name}] {key} is empty")
        if not isinstance(raw, str):
            return raw
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(
                self.path, line, f"[{self.name}] {key}: expected {typename}, got {raw!r}"
            ) from exc

    def floats(self, key, default=...):
        raw, line = self._raw(key, default)
        if not isinstance(raw, str):
            return raw
        if raw.strip() == "":
            return ()
        try:
            return tuple(float(part) for part in raw.split(","))
        except ValueError as exc:
            raise ConfigError(
                self.path, line, f"[{self.name}] {key}: expected comma-separated numbers"
            ) from exc

    def ints(self, key, default=...):
        vals = self.floats(key, default)
        if not isinstance(vals, tuple):
            return vals
        out = []
        for v in vals:
            if v != int(v):
                raise ConfigError(
                    self.path, self.value_line(key), f"[{self.name}] {key}: expected integers"
                )
            out.append(int(v))
        return tuple(out)


def _parse_bool(raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(raw)


def parse_config(path) -> ExperimentConfig:
    sections = _read_sections(path)
    net = _SectionReader(path, sections, "network")
    pl = _SectionReader(path, sections, "pathloss")
    sweep = _SectionReader(path, sections, "sweep")
    mcs = _SectionReader(path, sections, "mc")
    out = _SectionReader(path, sections, "output")

    cfg = ExperimentConfig(
        path=str(path),
        power_dbm=net.parse("power_dbm", float, typename="number"),
        tau_db=net.parse("tau_db", float, typename="number"),
        delta_h_m=net.parse("delta_h_m", float, typename="number"),
        n_antennas=net.ints("n_antennas")[0],
        n_users_list=net.ints("n_users"),
        exponents=pl.floats("exponents"),
        breakpoints_m=pl.floats("breakpoints_m", default=()),
        lambda_min_per_km2=sweep.parse("lambda_min_per_km2", float, typename="number"),
        lambda_max_per_km2=sweep.parse("lambda_max_per_km2", float, typename="number"),
        points=sweep.ints("points")[0],
        log_spaced=sweep.parse("log_spaced", _parse_bool, default=True, typename="boolean"),
        mc_trials=mcs.ints("trials", default=(0,))[0],
        mc_seed=mcs.ints("seed", default=(1,))[0],
        mc_window_radius_m=mcs.parse("window_radius_m", float, default=None, typename="number"),
        output_path=out.parse("path", str, typename="path"),
        golden={k: float(v[0]) for k, v in sections.get("golden", {}).items()},
    )

    if cfg.delta_h_m < 0:
        raise ConfigError(path, net.value_line("delta_h_m"), "delta_h_m must be >= 0")
    if cfg.n_antennas < 1:
        raise ConfigError(path, net.value_line("n_antennas"), "n_antennas must be >= 1")
    if not cfg.n_users_list:
        raise ConfigError(path, net.value_line("n_users"), "n_users needs at least one entry")
    for nu in cfg.n_users_list:
        if not 1 <= nu <= cfg.n_antennas:
            raise ConfigError(
                path, net.value_line("n_users"),
                f"n_users={nu} violates 1 <= n_users <= n_antennas={cfg.n_antennas}",
            )
    try:
        cfg.pathloss_model()
    except ValueError as exc:
        raise ConfigError(path, pl.value_line("exponents"), str(exc)) from exc
    if cfg.points < 1:
        raise ConfigError(path, sweep.value_line("points"), "points must be >= 1")
    if cfg.lambda_min_per_km2 <= 0 or cfg.lambda_max_per_km2 < cfg.lambda_min_per_km2:
        raise ConfigError(
            path, sweep.value_line("lambda_min_per_km2"),
            "need 0 < lambda_min_per_km2 <= lambda_max_per_km2",
        )
    if cfg.mc_trials < 0:
        raise ConfigError(path, mcs.value_line("trials"), "trials must be >= 0")
    if cfg.mc_window_radius_m is not None and cfg.mc_window_radius_m <= 0:
        raise ConfigError(path, mcs.value_line("window_radius_m"), "window_radius_m must be > 0")
    return cfg


def scheme_label(n_antennas: int, n_users: int) -> str:
    if n_users == 1:
        return "SU-BF"
    if n_users == n_antennas:
        return "full-SDMA"
    return "SDMA"


def _fmt(x) -> str:
    return format(x, ".12g")


def _sim_params(cfg: ExperimentConfig, net: NetworkConfig, model: PathlossModel):
    radius = cfg.mc_window_radius_m
    if radius is None:
        radius = montecarlo.default_window_radius(net, model)
    return montecarlo.SimParams(window_radius=radius, trials=cfg.mc_trials, seed=cfg.mc_seed)


def _compute_rows(cfg: ExperimentConfig, model: PathlossModel, n_users_list):
    """CSV row strings for every (n_users, lambda) pair of the grid."""
    rows = []
    for nu in n_users_list:
        label = scheme_label(cfg.n_antennas, nu)
        for lam_km2 in cfg.lambda_grid_per_km2():
            net = cfg.network(lam_km2, nu)
            try:
                cp = analytic.coverage_exact(net, model).cp
                cp_app = (
                    analytic.coverage_approx(net, model).cp if model.is_single_slope else None
                )
                if cfg.mc_trials > 0:
                    est = montecarlo.estimate_cp(net, model, _sim_params(cfg, net, model))
                    cp_mc, mc_se = est.cp_hat, est.std_err
                else:
                    cp_mc = mc_se = None
            except (ArithmeticError, montecarlo.WindowTooSmallError) as exc:
                raise NumericFailure(
                    f"numeric failure at lambda={_fmt(lam_km2)} per km^2 "
                    f"(scheme {label}): {exc}"
                ) from exc
            st = nu * lam_km2 * cp * math.log2(1.0 + net.tau)
            rows.append(",".join([
                _fmt(lam_km2), label, str(cfg.n_antennas), str(nu),
                _fmt(cp),
                _fmt(cp_app) if cp_app is not None else "",
                _fmt(cp_mc) if cp_mc is not None else "",
                _fmt(mc_se) if mc_se is not None else "",
                _fmt(st),
            ]))
    return rows


def _write_csv(path, rows, trailer=()):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row + "\n")
        for line in trailer:
            fh.write("# " + line + "\n")


def cmd_sweep(cfg: ExperimentConfig) -> int:
    if len(cfg.n_users_list) != 1:
        raise ConfigError(cfg.path, 0, "sweep needs a single n_users value (compare takes lists)")
    model = cfg.pathloss_model()
    rows = _compute_rows(cfg, model, cfg.n_users_list)
    _write_csv(cfg.output_path, rows)
    print(f"wrote {len(rows)} rows to {cfg.output_path}")
    return 0


def _critical_density_summary(cfg: ExperimentConfig, model: PathlossModel, nu: int):
    """(closed-form, numeric) critical densities per km^2; None where undefined."""
    net = cfg.network(cfg.lambda_min_per_km2, nu)
    closed = None
    if model.is_single_slope:
        closed = analytic.critical_density_closed(net, model.final_exponent) / M2_PER_KM2
    coverage_fn = analytic.coverage_approx if model.is_single_slope else analytic.coverage_exact
    lo = cfg.lambda_min_per_km2 * M2_PER_KM2
    hi = cfg.lambda_max_per_km2 * M2_PER_KM2
    try:
        numeric = analytic.critical_density_numeric(net, model, (lo, hi), coverage_fn) / M2_PER_KM2
    except analytic.BracketError:
        numeric = None
    return closed, numeric


def cmd_compare(cfg: ExperimentConfig) -> int:
    model = cfg.pathloss_model()
    users = tuple(sorted(set(cfg.n_users_list)))
    rows = _compute_rows(cfg, model, users)
    trailer = []
    for nu in users:
        closed, numeric = _critical_density_summary(cfg, model, nu)
        closed_txt = _fmt(closed) if closed not in (None, math.inf) else (
            "inf" if closed == math.inf else "n/a"
        )
        numeric_txt = _fmt(numeric) if numeric is not None else "none-in-range"
        line = (
            f"critical_density_per_km2 scheme={scheme_label(cfg.n_antennas, nu)} "
            f"n_users={nu} closed={closed_txt} numeric={numeric_txt}"
        )
        trailer.append(line)
        print(line)
    _write_csv(cfg.output_path, rows, trailer)
    print(f"wrote {len(rows)} rows to {cfg.output_path}")
    return 0


class _Report:
    def __init__(self):
        self.lines = []
        self.failed = 0

    def result(self, name, ok, detail):
        self.lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        if not ok:
            self.failed += 1

    def skip(self, name, reason):
        self.lines.append(f"SKIP  {name}: {reason}")


def _golden_quantity(name, cfg, model):
    """Computable reference quantities addressable from the [golden] block."""
    lam_mid = math.sqrt(cfg.lambda_min_per_km2 * cfg.lambda_max_per_km2)
    nu = cfg.n_users_list[0]
    net_mid = cfg.network(lam_mid, nu)
    if name == "omega_su_bf":
        return omega(1, model.final_exponent, net_mid.tau)
    if name == "critical_density_su_bf_per_km2":
        su = replace(net_mid, n_users=1)
        return analytic.critical_density_closed(su, model.final_exponent) / M2_PER_KM2
    if name == "cp_exact_mid":
        return analytic.coverage_exact(net_mid, model).cp
    if name == "cp_approx_mid":
        if not model.is_single_slope:
            raise ConfigError(cfg.path, 0, "cp_approx_mid golden requires single-slope pathloss")
        return analytic.coverage_approx(net_mid, model).cp
    raise ConfigError(cfg.path, 0, f"unknown golden key {name!r}")


def cmd_validate(cfg: ExperimentConfig) -> int:
    model = cfg.pathloss_model()
    report = _Report()
    alpha_t = model.final_exponent
    tau = cfg.tau_linear
    nu0 = cfg.n_users_list[0]
    lam_mid_km2 = math.sqrt(cfg.lambda_min_per_km2 * cfg.lambda_max_per_km2)
    net_mid = cfg.network(lam_mid_km2, nu0)

    # omega against its arctan closed form at y = 4.
    worst = max(
        abs(omega(1, 4.0, t) - (1.0 + math.sqrt(t) * math.atan(math.sqrt(t))))
        / (1.0 + math.sqrt(t) * math.atan(math.sqrt(t)))
        for t in (0.1, 1.0, 10.0, 100.0)
    )
    report.result("omega-arctan-closed-form", worst <= 1e-10,
                  f"max rel err {worst:.2e}, tol 1e-10")

    vals = [omega(n, alpha_t, tau) for n in range(1, 33)]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    report.result("omega-increasing-in-first-argument", increasing,
                  f"omega(N, {alpha_t}, {_fmt(tau)}) over N=1..32")

    if cfg.delta_h_m > 0:
        stars = [
            analytic.critical_density_closed(
                replace(net_mid, n_antennas=na, n_users=na), alpha_t
            )
            for na in (1, 2, 4, 8, 16)
        ]
        ok = all(b < a for a, b in zip(stars, stars[1:]))
        report.result("critical-density-decreasing-full-sdma", ok,
                      "lambda* over N_a in {1,2,4,8,16}, N_U=N_a")

        stars16 = [
            analytic.critical_density_closed(
                replace(net_mid, n_antennas=16, n_users=nu), alpha_t
            )
            for nu in range(1, 17)
        ]
        ok = all(stars16[0] > s for s in stars16[1:])
        report.result("critical-density-max-at-su-bf", ok,
                      "lambda* uniquely maximal at N_U=1 for N_a=16")
    else:
        report.skip("critical-density-decreasing-full-sdma", "delta_h = 0: no finite lambda*")
        report.skip("critical-density-max-at-su-bf", "delta_h = 0: no finite lambda*")

    if model.is_single_slope:
        single = replace(net_mid, n_antennas=1, n_users=1)
        gap = abs(
            analytic.coverage_approx(single, model).cp
            - analytic.coverage_exact(single, model).cp
        )
        report.result("approx-exact-overlap-single-antenna", gap <= 1e-6,
                      f"|gap| {gap:.2e} at lambda={_fmt(lam_mid_km2)}/km^2, tol 1e-6")
        if cfg.delta_h_m > 0:
            closed = analytic.critical_density_closed(net_mid, alpha_t)
            bracket = (closed / 30.0, closed * 30.0)
            numeric = analytic.critical_density_numeric(
                net_mid, model, bracket, analytic.coverage_approx
            )
            rel = abs(numeric - closed) / closed
            report.result("closed-vs-numeric-critical-density", rel <= 0.01,
                          f"rel diff {rel:.2e}, tol 1e-2")
        else:
            report.skip("closed-vs-numeric-critical-density", "delta_h = 0: no finite lambda*")
    else:
        report.skip("approx-exact-overlap-single-antenna", "multi-slope model")
        report.skip("closed-vs-numeric-critical-density", "multi-slope model")

    cp_p = analytic.coverage_exact(net_mid, model).cp
    cp_p100 = analytic.coverage_exact(replace(net_mid, power=net_mid.power * 100.0), model).cp
    rel = abs(cp_p - cp_p100) / cp_p
    report.result("transmit-power-invariance", rel <= 1e-9,
                  f"rel diff {rel:.2e} between P and 100P, tol 1e-9")

    for name, expected in sorted(cfg.golden.items()):
        got = _golden_quantity(name, cfg, model)
        rel = abs(got - expected) / max(abs(expected), 1e-300)
        report.result(f"golden:{name}", rel <= 1e-6,
                      f"observed {_fmt(got)}, expected {_fmt(expected)}, rel diff {rel:.2e}")

    if cfg.mc_trials >= MIN_VALIDATE_TRIALS:
        for lam_km2 in (cfg.lambda_min_per_km2, lam_mid_km2):
            net = cfg.network(lam_km2, nu0)
            exact = analytic.coverage_exact(net, model).cp
            est = montecarlo.estimate_cp(net, model, _sim_params(cfg, net, model))
            name = f"mc-analytic-agreement@{_fmt(lam_km2)}"
            if est.std_err == 0.0:
                report.skip(name, "degenerate standard error (all trials identical)")
                continue
            sig = abs(exact - est.cp_hat) / est.std_err
            report.result(name, sig <= 3.0,
                          f"exact {exact:.6f}, mc {est.cp_hat:.6f}, {sig:.2f} sigma, tol 3")
    else:
        report.skip("mc-analytic-agreement",
                    f"trials {cfg.mc_trials} < {MIN_VALIDATE_TRIALS}: 3-sigma check unresolvable")

    for line in report.lines:
        print(line)
    print(f"{report.failed} of {len(report.lines)} checks failed"
          if report.failed else f"all {len(report.lines)} checks passed or skipped")
    return 1 if report.failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sdmacov",
        description="SDMA ultra-dense network coverage/throughput experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_txt in (
        ("sweep", "density sweep for one scheme, CSV output"),
        ("compare", "sweep several n_users schemes plus critical-density summary"),
        ("validate", "run the built-in consistency checks"),
    ):
        cmd = sub.add_parser(name, help=help_txt)
        cmd.add_argument("--config", required=True, help="experiment config file")
        cmd.add_argument("--output", help="override [output] path")
        cmd.add_argument("--mc-trials", type=int, help="override [mc] trials")
        cmd.add_argument("--seed", type=int, help="override [mc] seed")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        if args.output is not None:
            cfg.output_path = args.output
        if args.mc_trials is not None:
            if args.mc_trials < 0:
                raise ConfigError("<cli>", 0, "--mc-trials must be >= 0")
            cfg.mc_trials = args.mc_trials
        if args.seed is not None:
            cfg.mc_seed = args.seed
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(str(exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
