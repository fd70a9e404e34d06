"""Config-driven experiments comparing measured and predicted rates.

Config files are INI with a flat key schema::

    [objective]
    family = quadratic          ; quadratic | quartic
    spectrum = 1, 4             ; or kappa_min / kappa_max / dimension
    minimizer = 0, 0            ; optional, defaults to the origin
    c = 0.1                     ; quartic coefficient (quartic family only)

    [run]
    budget = 300
    floor = auto                ; or a number
    burn_in = 0.5
    tolerance = 0.02
    repeats = 5
    seed = 1                    ; repeat i uses seed + i
    radius = 0.5                ; init sampled uniformly in this ball
    init = 1, 1                 ; optional explicit init (overrides seed/radius)

    [optimizer.adam]            ; one section per experiment; id after the dot
    kind = Adam
    gamma = auto                ; auto derives the tuned value
    alpha = auto
    beta = 0.9
    epsilon = 0.1

    [separation]                ; used by the ``separation`` subcommand
    kappa_min = 1
    kappa_max = 4
    gamma_bar = 0.05
    epsilon = 0.1
    beta = 0.9
    delta = 0.01
    budget = 500
    init = 1, 1
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import ratefit, spectral
from .errors import InsufficientDataError, UsageError
from .objectives import Objective, make_quadratic, make_quartic_perturbed, sample_ball
from .optim import Kind, OptimizerConfig, Termination, Trajectory, run

AUTO_FLOOR_REL = 1e-12
AUTO_FLOOR_ABS = 1e-150  # squared norms underflow below ~1e-154

CSV_COLUMNS = (
    "experiment_id", "optimizer", "cond", "gamma", "alpha", "beta", "epsilon",
    "predicted_rate", "rho_hat_mean", "rho_hat_max_dev", "verdict", "steps_used",
    "terminated",
)
KIND_ORDER = {Kind.GD: 0, Kind.MOMENTUM: 1, Kind.RMSPROP: 2, Kind.ADAM: 3}


def auto_floor(minimizer) -> float:
    """Distance floor tied to the rounding level of ``theta - minimizer``."""
    scale = float(np.linalg.norm(np.asarray(minimizer, dtype=np.float64)))
    return max(AUTO_FLOOR_REL * scale, AUTO_FLOOR_ABS)


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectiveSpec:
    family: str = "quadratic"
    spectrum: tuple | None = None
    kappa_min: float | None = None
    kappa_max: float | None = None
    dimension: int | None = None
    minimizer: tuple | None = None
    c: float = 0.0

    def problems(self) -> list[str]:
        out = []
        if self.family not in ("quadratic", "quartic"):
            out.append(f"objective.family: expected quadratic or quartic, got {self.family!r}")
        if self.spectrum is None:
            if None in (self.kappa_min, self.kappa_max, self.dimension):
                out.append("objective.spectrum: give spectrum or all of "
                           "kappa_min, kappa_max, dimension")
            else:
                if not 0 < self.kappa_min <= self.kappa_max:
                    out.append("objective.kappa_min/kappa_max: need 0 < kappa_min <= kappa_max")
                if self.dimension < 1:
                    out.append("objective.dimension: must be >= 1")
                elif self.dimension == 1 and self.kappa_min != self.kappa_max:
                    out.append("objective.dimension: 1 requires kappa_min == kappa_max")
        elif not self.spectrum or any(not (l > 0) for l in self.spectrum):
            out.append("objective.spectrum: entries must be positive")
        if self.minimizer is not None and not out:
            if len(self.minimizer) != len(self.resolved_spectrum()):
                out.append("objective.minimizer: length differs from the spectrum")
        if self.c < 0:
            out.append("objective.c: must be >= 0")
        if self.family == "quadratic" and self.c != 0:
            out.append("objective.c: only meaningful for the quartic family")
        return out

    def resolved_spectrum(self) -> tuple:
        if self.spectrum is not None:
            return tuple(float(l) for l in self.spectrum)
        return tuple(float(l) for l in
                     np.linspace(self.kappa_min, self.kappa_max, self.dimension))

    def build(self) -> Objective:
        lam = self.resolved_spectrum()
        if self.family == "quartic":
            return make_quartic_perturbed(lam, self.minimizer, self.c)
        return make_quadratic(lam, self.minimizer)


@dataclass(frozen=True)
class OptimizerSpec:
    """``gamma``/``alpha`` of ``None`` mean auto."""

    kind: Kind
    gamma: float | None = None
    alpha: float | None = None
    beta: float = 0.9
    epsilon: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: str
    objective: ObjectiveSpec
    optimizer: OptimizerSpec
    init: tuple | None = None
    seed: int = 1
    radius: float = 0.5
    budget: int = 300
    floor: float | None = None
    burn_in: float = ratefit.DEFAULT_BURN_IN
    tolerance: float = ratefit.DEFAULT_TOLERANCE
    repeats: int = 5

    def problems(self) -> list[str]:
        out = self.objective.problems()
        if self.repeats < 1:
            out.append("run.repeats: must be >= 1")
        if self.budget < 1:
            out.append("run.budget: must be >= 1")
        if self.floor is not None and self.floor <= 0:
            out.append("run.floor: must be > 0 (or auto)")
        if not 0 <= self.burn_in < 1:
            out.append("run.burn_in: must lie in [0, 1)")
        if self.tolerance <= 0:
            out.append("run.tolerance: must be > 0")
        if self.init is None and self.radius <= 0:
            out.append("run.radius: must be > 0")
        if self.init is not None and not out:
            if len(self.init) != len(self.objective.resolved_spectrum()):
                out.append("run.init: length differs from the objective dimension")
        opt = self.optimizer
        auto = opt.gamma is None or (opt.kind.uses_momentum and opt.alpha is None)
        if auto and not out:
            lam = self.objective.resolved_spectrum()
            if not min(lam) < max(lam):
                out.append(f"optimizer.{self.experiment_id}: auto needs kappa_min < kappa_max")
        return out


@dataclass(frozen=True, eq=False)
class Plan:
    """An :class:`ExperimentSpec` with every auto value resolved."""

    spec: ExperimentSpec
    objective: Objective
    config: OptimizerConfig
    predicted_rate: float
    floor: float
    seeds: tuple
    inits: tuple


def resolve_optimizer(opt: OptimizerSpec, spectrum) -> tuple[OptimizerConfig, float]:
    """Fill in auto hyperparameters and return the config with its predicted rate."""
    kmin, kmax = min(spectrum), max(spectrum)
    eps = opt.epsilon if opt.kind.adaptive else 1.0
    gamma, alpha = opt.gamma, opt.alpha
    tuned = None
    if gamma is None or (opt.kind.uses_momentum and alpha is None):
        tuned = spectral.predicted_rate(opt.kind, kmin, kmax, eps)
    if gamma is None:
        gamma = tuned.gamma
    if not opt.kind.uses_momentum:
        alpha = 0.0
    elif alpha is None:
        alpha = tuned.alpha
    config = OptimizerConfig(
        kind=opt.kind, gamma=gamma, alpha=alpha,
        beta=opt.beta if opt.kind.adaptive else 0.0, epsilon=eps)
    if tuned is not None and gamma == tuned.gamma and (
            not opt.kind.uses_momentum or alpha == tuned.alpha):
        rate = tuned.rate
    else:
        rate = spectral.linearized_rate(opt.kind, spectrum, gamma, alpha, eps)
    return config, rate


def plan(spec: ExperimentSpec) -> Plan:
    problems = spec.problems()
    if problems:
        raise UsageError(f"invalid experiment {spec.experiment_id!r}: " + "; ".join(problems))
    objective = spec.objective.build()
    try:
        config, rate = resolve_optimizer(spec.optimizer, spec.objective.resolved_spectrum())
    except UsageError as exc:
        raise UsageError(f"invalid experiment {spec.experiment_id!r}: "
                         f"optimizer.{spec.experiment_id}: {exc}") from exc
    seeds = tuple(spec.seed + i for i in range(spec.repeats))
    if spec.init is not None:
        inits = tuple(np.array(spec.init, dtype=np.float64) for _ in seeds)
    else:
        inits = tuple(sample_ball(np.random.default_rng(s), objective.minimizer,
                                  spec.radius, 1)[0] for s in seeds)
    floor = spec.floor if spec.floor is not None else auto_floor(objective.minimizer)
    return Plan(spec, objective, config, rate, floor, seeds, inits)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RepeatResult:
    repeat: int
    seed: int
    rho_hat: float
    residual: float
    verdict: ratefit.Verdict
    terminated: Termination
    steps_used: int
    sup_statistic: float
    trajectory: Trajectory = field(repr=False)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    plan: Plan
    repeats: tuple

    @property
    def experiment_id(self) -> str:
        return self.plan.spec.experiment_id

    @property
    def predicted_rate(self) -> float:
        return self.plan.predicted_rate

    @property
    def gamma_used(self) -> float:
        return self.plan.config.gamma

    @property
    def alpha_used(self) -> float:
        return self.plan.config.alpha

    @property
    def sup_statistic(self) -> float:
        return max(r.sup_statistic for r in self.repeats)

    @property
    def rho_hat_mean(self) -> float:
        return float(np.mean([r.rho_hat for r in self.repeats]))

    @property
    def rho_hat_max_dev(self) -> float:
        return max(abs(r.rho_hat - self.predicted_rate) for r in self.repeats)

    @property
    def verdict(self) -> ratefit.Verdict:
        verdicts = {r.verdict for r in self.repeats}
        for v in (ratefit.Verdict.SLOWER, ratefit.Verdict.FASTER):
            if v in verdicts:
                return v
        return ratefit.Verdict.MATCH

    @property
    def ok(self) -> bool:
        return all(r.verdict is not ratefit.Verdict.SLOWER for r in self.repeats)


def _measure(traj: Trajectory, spec: ExperimentSpec, predicted: float, floor: float):
    try:
        est = ratefit.estimate_rate(traj.distances, spec.burn_in, floor)
        rho, residual = est.rho_hat, est.residual
    except InsufficientDataError:
        residual = math.nan
        usable = ratefit.usable_length(traj.distances, floor)
        if traj.terminated is Termination.DIVERGED or usable < 2:
            rho = math.inf if traj.terminated is Termination.DIVERGED else 0.0
        else:
            # too few points for a fit: average contraction over what exists
            d = traj.distances
            rho = float((d[usable - 1] / d[0]) ** (1.0 / (usable - 1)))
    if traj.terminated is Termination.DIVERGED:
        verdict = ratefit.Verdict.SLOWER
    else:
        verdict = ratefit.adjudicate(rho, predicted, spec.tolerance)
    reference = predicted + spec.tolerance
    if 0 < reference < 1:
        usable = ratefit.usable_length(traj.distances, floor)
        sup = ratefit.sup_ratio_statistic(traj.distances[:max(usable, 1)], reference)
    else:
        sup = math.nan
    return rho, residual, verdict, sup


def run_experiment(spec: ExperimentSpec, backend=None) -> ExperimentResult:
    """Run every seeded repeat of ``spec``; divergence is recorded, not raised."""
    p = plan(spec)
    repeats = []
    for i, (seed, init) in enumerate(zip(p.seeds, p.inits)):
        traj = run(p.objective, init, p.config, spec.budget, p.floor, backend=backend)
        rho, residual, verdict, sup = _measure(traj, spec, p.predicted_rate, p.floor)
        repeats.append(RepeatResult(i, seed, rho, residual, verdict, traj.terminated,
                                    traj.steps_used, sup, traj))
    return ExperimentResult(p, tuple(repeats))


# ---------------------------------------------------------------------------
# Adam vs GD separation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparationSpec:
    kappa_min: float
    kappa_max: float
    gamma_bar: float
    epsilon: float
    beta: float
    delta: float
    budget: int = 500
    init: tuple = (1.0, 1.0)
    minimizer: tuple | None = None


@dataclass(frozen=True, eq=False)
class SeparationReport:
    """GD and Adam distances rescaled by their reference rates.

    ``gd_scaled_log[n] = log|Phi_n - v| - n log(gd_reference)`` should grow;
    ``adam_scaled_log`` should shrink.  Each is summarised by the mean over
    its last quarter minus the mean over its first quarter.
    """

    alpha: float
    gamma_adam: float
    gd_reference: float
    adam_reference: float
    gd_scaled_log: np.ndarray
    adam_scaled_log: np.ndarray
    gd_log_ratio: float
    adam_log_ratio: float
    gd: Trajectory = field(repr=False)
    adam: Trajectory = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.gd_log_ratio > 0 and self.adam_log_ratio < 0


def _quarter_log_ratio(logs: np.ndarray) -> float:
    q = max(1, len(logs) // 4)
    return float(np.mean(logs[-q:]) - np.mean(logs[:q]))


def run_separation(kappa_min, kappa_max, gamma_bar, epsilon, beta, delta,
                   budget=500, init=(1.0, 1.0), minimizer=None,
                   backend=None) -> SeparationReport:
    """GD at ``gamma_bar`` against Adam at ``epsilon * gamma_bar`` on a quadratic
    whose extreme curvatures are ``kappa_min`` and ``kappa_max``.

    Adam uses ``alpha = ((1 - gamma_bar kappa_min) / (1 + gamma_bar kappa_min))**2``.
    """
    xi = np.asarray(init, dtype=np.float64).reshape(-1)
    d = xi.size
    center = np.zeros(d) if minimizer is None else np.asarray(minimizer, dtype=np.float64)
    problems = []
    if not 0 < kappa_min < kappa_max:
        problems.append("need 0 < kappa_min < kappa_max (kappa = min lambda < max lambda = K)")
    if d < 2:
        problems.append("init needs dimension >= 2 to realise kappa_min < kappa_max")
    if center.shape != xi.shape:
        problems.append("minimizer and init lengths differ")
    elif not np.min(np.abs(xi - center)) > 0:
        problems.append("init must differ from the minimizer in every coordinate "
                        "(min_i |xi_i - v_i| > 0)")
    if not 0 < epsilon < 1:
        problems.append("epsilon must lie in (0, 1)")
    if not 0 < gamma_bar < 1.0 / (4.0 * kappa_max):
        problems.append("gamma_bar must lie in (0, 1 / (4 kappa_max))")
    if problems:
        raise UsageError("separation preconditions violated: " + "; ".join(problems))
    q = gamma_bar * kappa_min
    alpha = ((1.0 - q) / (1.0 + q)) ** 2
    if not alpha * alpha < beta < 1:
        problems.append(f"beta must lie in (alpha^2, 1) = ({alpha * alpha:.6g}, 1)")
    if not 0 < delta < 1.0 - q:
        problems.append("delta must lie in (0, 1 - gamma_bar kappa_min)")
    if int(budget) != budget or budget < 4:
        problems.append("budget must be an integer >= 4")
    if problems:
        raise UsageError("separation preconditions violated: " + "; ".join(problems))

    objective = make_quadratic(np.linspace(kappa_min, kappa_max, d), center)
    floor = auto_floor(center)
    gd = run(objective, xi, OptimizerConfig(Kind.GD, gamma_bar), int(budget), floor,
             backend=backend)
    adam_cfg = OptimizerConfig(Kind.ADAM, epsilon * gamma_bar, alpha, beta, epsilon)
    adam = run(objective, xi, adam_cfg, int(budget), floor, backend=backend)

    gd_ref = 1.0 - q - delta
    adam_ref = (1.0 - q) / (1.0 + q) + delta

    def scaled(traj, ref):
        usable = ratefit.usable_length(traj.distances, floor)
        d_ = traj.distances[:max(usable, 1)]
        return np.log(d_) - np.arange(d_.size) * math.log(ref)

    gd_log = scaled(gd, gd_ref)
    adam_log = scaled(adam, adam_ref)
    return SeparationReport(
        alpha=alpha, gamma_adam=adam_cfg.gamma, gd_reference=gd_ref, adam_reference=adam_ref,
        gd_scaled_log=gd_log, adam_scaled_log=adam_log,
        gd_log_ratio=_quarter_log_ratio(gd_log), adam_log_ratio=_quarter_log_ratio(adam_log),
        gd=gd, adam=adam)


# ---------------------------------------------------------------------------
# Adam global-convergence hypotheses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfigCheck:
    ok: bool
    failures: tuple

    def __bool__(self):
        return self.ok


def validate_adam_global_config(kappa_max_lipschitz: float, alpha: float, beta: float,
                                gamma: float, epsilon: float) -> ConfigCheck:
    """Check ``alpha**2 < beta`` and ``gamma < alpha * epsilon / K`` (both strict)."""
    if not (kappa_max_lipschitz > 0 and gamma > 0 and epsilon > 0):
        raise UsageError("Lipschitz bound, gamma and epsilon must be positive")
    if not (0 < alpha < 1 and 0 < beta < 1):
        raise UsageError("alpha and beta must lie in (0, 1)")
    failures = []
    if not alpha * alpha < beta:
        failures.append(f"alpha^2 < beta fails: {alpha * alpha!r} >= {beta!r}")
    bound = alpha * epsilon / kappa_max_lipschitz
    if not gamma < bound:
        failures.append(f"gamma < alpha*epsilon/K fails: {gamma!r} >= {bound!r}")
    return ConfigCheck(not failures, tuple(failures))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _num(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


def _sorted(results):
    return sorted(results, key=lambda r: r.experiment_id)


def _csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for res in _sorted(results):
        cfg = res.plan.config
        kind = cfg.kind
        w.writerow([
            res.experiment_id, kind.value, _num(res.plan.objective.cond), _num(cfg.gamma),
            _num(cfg.alpha) if kind.uses_momentum else "",
            _num(cfg.beta) if kind.adaptive else "",
            _num(cfg.epsilon) if kind.adaptive else "",
            _num(res.predicted_rate), _num(res.rho_hat_mean), _num(res.rho_hat_max_dev),
            res.verdict.value, max(r.steps_used for r in res.repeats),
            "|".join(sorted({r.terminated.value for r in res.repeats})),
        ])
    return buf.getvalue()


def _table(results) -> str:
    rows = sorted(results, key=lambda r: (KIND_ORDER[r.plan.config.kind], r.experiment_id))
    header = ("experiment", "optimizer", "cond", "gamma", "alpha", "predicted",
              "rho_hat", "(c-1)/(c+1)", "(vc-1)/(vc+1)", "verdict")
    body = []
    for res in rows:
        cfg = res.plan.config
        c = res.plan.objective.cond
        body.append((
            res.experiment_id, cfg.kind.value, f"{c:.6g}", f"{cfg.gamma:.6g}",
            f"{cfg.alpha:.6g}" if cfg.kind.uses_momentum else "-",
            f"{res.predicted_rate:.6f}", f"{res.rho_hat_mean:.6f}",
            f"{(c - 1) / (c + 1):.6f}", f"{(math.sqrt(c) - 1) / (math.sqrt(c) + 1):.6f}",
            res.verdict.value,
        ))
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip(),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in body]
    return "\n".join(lines) + "\n"


def _plotdata(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("experiment_id", "repeat", "n", "distance", "reference"))
    for res in _sorted(results):
        rate = res.predicted_rate
        for rep in res.repeats:
            for n, dist in enumerate(rep.trajectory.distances):
                w.writerow((res.experiment_id, rep.repeat, n, _num(dist), _num(rate ** n)))
    return buf.getvalue()


def emit_results(results, fmt: str = "csv") -> str:
    """Render results as ``csv``, ``table`` or ``plotdata`` text."""
    results = list(results)
    if not results:
        raise UsageError("no results to emit")
    emitters = {"csv": _csv, "table": _table, "plotdata": _plotdata}
    if fmt not in emitters:
        raise UsageError(f"unknown format {fmt!r}; expected csv, table or plotdata")
    return emitters[fmt](results)


def emit_separation(report: SeparationReport, fmt: str = "table") -> str:
    if fmt == "plotdata":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("n", "gd_scaled_log", "adam_scaled_log"))
        for n in range(max(len(report.gd_scaled_log), len(report.adam_scaled_log))):
            gd = report.gd_scaled_log[n] if n < len(report.gd_scaled_log) else None
            ad = report.adam_scaled_log[n] if n < len(report.adam_scaled_log) else None
            w.writerow((n, _num(gd), _num(ad)))
        return buf.getvalue()
    fields = [
        ("alpha", report.alpha), ("gamma_adam", report.gamma_adam),
        ("gd_reference", report.gd_reference), ("adam_reference", report.adam_reference),
        ("gd_log_ratio", report.gd_log_ratio), ("adam_log_ratio", report.adam_log_ratio),
        ("gd_steps", report.gd.steps_used), ("adam_steps", report.adam.steps_used),
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([k for k, _ in fields] + ["separated"])
        w.writerow([_num(v) if isinstance(v, float) else v for _, v in fields]
                   + [str(report.ok).lower()])
        return buf.getvalue()
    if fmt != "table":
        raise UsageError(f"unknown format {fmt!r}")
    lines = [f"{k:<16}{v:.10g}" if isinstance(v, float) else f"{k:<16}{v}"
             for k, v in fields]
    lines.append(f"{'separated':<16}{'yes' if report.ok else 'no'}")
    return "\n".join(lines) + "\n"


def spectrum_rows(spec: ExperimentSpec):
    """Per-mode closed forms and the eigensolver spectrum for one experiment."""
    p = plan(spec)
    cfg = p.config
    lam = spec.objective.resolved_spectrum()
    step = cfg.gamma / cfg.epsilon if cfg.kind.adaptive else cfg.gamma
    report = spectral.spectral_report(np.diag(lam), cfg.alpha, step)
    return p, report


def emit_spectrum(specs, fmt: str = "table") -> str:
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("experiment_id", "optimizer", "lambda", "mu_plus_re", "mu_plus_im",
                    "mu_minus_re", "mu_minus_im", "spectral_radius", "predicted_rate"))
        for spec in sorted(specs, key=lambda s: s.experiment_id):
            p, rep = spectrum_rows(spec)
            for lam, mp, mm in rep.per_mode:
                w.writerow((spec.experiment_id, p.config.kind.value, _num(lam),
                            _num(mp.real), _num(mp.imag), _num(mm.real), _num(mm.imag),
                            _num(rep.spectral_radius), _num(rep.predicted_rate)))
        return buf.getvalue()
    if fmt != "table":
        raise UsageError(f"spectrum supports csv or table, not {fmt!r}")
    for spec in specs:
        p, rep = spectrum_rows(spec)
        cfg = p.config
        buf.write(f"[{spec.experiment_id}] {cfg.kind.value}  gamma={cfg.gamma:.6g}  "
                  f"alpha={cfg.alpha:.6g}\n")
        for lam, mp, mm in rep.per_mode:
            buf.write(f"  lambda={lam:<10.6g} mu+={mp:.6g}  mu-={mm:.6g}  "
                      f"|mu|max={max(abs(mp), abs(mm)):.6g}\n")
        eig = ", ".join(f"{z:.6g}" for z in sorted(rep.eigenvalues, key=lambda z: (-abs(z), z.real, z.imag)))
        buf.write(f"  eigenvalues: {eig}\n")
        rate = "unstable" if rep.predicted_rate is None else f"{rep.predicted_rate:.10g}"
        buf.write(f"  spectral radius: {rep.spectral_radius:.10g}  predicted rate: {rate}\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Config:
    experiments: tuple = ()
    separation: SeparationSpec | None = None


_OBJECTIVE_KEYS = {"family", "spectrum", "kappa_min", "kappa_max", "dimension", "minimizer", "c"}
_RUN_KEYS = {"budget", "floor", "burn_in", "tolerance", "repeats", "seed", "radius", "init"}
_OPT_KEYS = {"kind", "gamma", "alpha", "beta", "epsilon"}
_SEP_KEYS = {"kappa_min", "kappa_max", "gamma_bar", "epsilon", "beta", "delta", "budget",
             "init", "minimizer"}


class _Section:
    """Typed reads with per-key diagnostics collected in ``errors``."""

    def __init__(self, name, proxy, allowed, errors):
        self.name, self.proxy, self.errors = name, proxy, errors
        for key in proxy:
            if key not in allowed:
                errors.append(f"[{name}] {key}: unknown key")

    def _get(self, key, conv, default):
        if key not in self.proxy:
            return default
        raw = self.proxy[key].strip()
        try:
            return conv(raw)
        except (ValueError, UsageError) as exc:
            self.errors.append(f"[{self.name}] {key}: cannot parse {raw!r} ({exc})")
            return default

    def num(self, key, default=None):
        return self._get(key, float, default)

    def int(self, key, default=None):
        return self._get(key, int, default)

    def str(self, key, default=None):
        return self._get(key, str, default)

    def vec(self, key, default=None):
        return self._get(key, lambda s: tuple(float(x) for x in s.replace(",", " ").split()),
                         default)

    def auto(self, key, default=None):
        return self._get(key, lambda s: None if s.lower() == "auto" else float(s), default)


def parse_config(text: str) -> Config:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"malformed config: {exc}") from exc
    errors: list[str] = []
    known = {"objective", "run", "separation", "optimizer"}
    for name in cp.sections():
        if name not in known and not name.startswith("optimizer."):
            errors.append(f"[{name}]: unknown section")

    experiments = []
    opt_sections = [s for s in cp.sections() if s == "optimizer" or s.startswith("optimizer.")]
    if opt_sections:
        if not cp.has_section("objective"):
            errors.append("[objective]: section required for experiments")
        obj = _Section("objective", cp["objective"] if cp.has_section("objective") else {},
                       _OBJECTIVE_KEYS, errors)
        objective = ObjectiveSpec(
            family=obj.str("family", "quadratic").lower(), spectrum=obj.vec("spectrum"),
            kappa_min=obj.num("kappa_min"), kappa_max=obj.num("kappa_max"),
            dimension=obj.int("dimension"), minimizer=obj.vec("minimizer"), c=obj.num("c", 0.0))
        rs = _Section("run", cp["run"] if cp.has_section("run") else {}, _RUN_KEYS, errors)
        run_kw = dict(
            init=rs.vec("init"), seed=rs.int("seed", 1), radius=rs.num("radius", 0.5),
            budget=rs.int("budget", 300), floor=rs.auto("floor", None),
            burn_in=rs.num("burn_in", ratefit.DEFAULT_BURN_IN),
            tolerance=rs.num("tolerance", ratefit.DEFAULT_TOLERANCE),
            repeats=rs.int("repeats", 5))
        for name in opt_sections:
            os_ = _Section(name, cp[name], _OPT_KEYS, errors)
            kind_raw = os_.str("kind")
            if kind_raw is None:
                errors.append(f"[{name}] kind: required")
                continue
            try:
                kind = Kind.parse(kind_raw)
            except UsageError as exc:
                errors.append(f"[{name}] kind: {exc}")
                continue
            exp_id = name.partition(".")[2] or kind.value.lower()
            opt = OptimizerSpec(kind=kind, gamma=os_.auto("gamma", None),
                                alpha=os_.auto("alpha", None), beta=os_.num("beta", 0.9),
                                epsilon=os_.num("epsilon", 0.1))
            experiments.append(ExperimentSpec(experiment_id=exp_id, objective=objective,
                                              optimizer=opt, **run_kw))
        ids = [e.experiment_id for e in experiments]
        for dup in sorted({i for i in ids if ids.count(i) > 1}):
            errors.append(f"[optimizer.{dup}]: duplicate experiment id")

    separation = None
    if cp.has_section("separation"):
        ss = _Section("separation", cp["separation"], _SEP_KEYS, errors)
        values = {k: ss.num(k) for k in ("kappa_min", "kappa_max", "gamma_bar", "epsilon",
                                          "beta", "delta")}
        missing = [k for k, v in values.items() if v is None]
        for k in missing:
            errors.append(f"[separation] {k}: required")
        if not missing:
            separation = SeparationSpec(**values, budget=ss.int("budget", 500),
                                        init=ss.vec("init", (1.0, 1.0)),
                                        minimizer=ss.vec("minimizer"))
    if errors:
        raise UsageError("invalid config:\n  " + "\n  ".join(errors))
    for exp in experiments:
        problems = exp.problems()
        if problems:
            errors.extend(problems)
    if errors:
        raise UsageError("invalid config:\n  " + "\n  ".join(errors))
    return Config(tuple(experiments), separation)


def load_config(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _fmt_vec(v) -> str:
    return ", ".join(_num(x) for x in v)


def _fmt_auto(x) -> str:
    return "auto" if x is None else _num(x)


def dump_config(config: Config) -> str:
    """Serialise back to the INI schema; experiments must share objective and run keys."""
    lines = []
    exps = list(config.experiments)
    if exps:
        first = exps[0]
        shared = ("objective", "init", "seed", "radius", "budget", "floor", "burn_in",
                  "tolerance", "repeats")
        for e in exps[1:]:
            if any(getattr(e, k) != getattr(first, k) for k in shared):
                raise UsageError("experiments with different objective/run settings "
                                 "cannot share one config file")
        o = first.objective
        lines.append("[objective]")
        lines.append(f"family = {o.family}")
        if o.spectrum is not None:
            lines.append(f"spectrum = {_fmt_vec(o.spectrum)}")
        for key in ("kappa_min", "kappa_max"):
            if getattr(o, key) is not None:
                lines.append(f"{key} = {_num(getattr(o, key))}")
        if o.dimension is not None:
            lines.append(f"dimension = {o.dimension}")
        if o.minimizer is not None:
            lines.append(f"minimizer = {_fmt_vec(o.minimizer)}")
        if o.c:
            lines.append(f"c = {_num(o.c)}")
        lines += ["", "[run]", f"budget = {first.budget}", f"floor = {_fmt_auto(first.floor)}",
                  f"burn_in = {_num(first.burn_in)}", f"tolerance = {_num(first.tolerance)}",
                  f"repeats = {first.repeats}", f"seed = {first.seed}",
                  f"radius = {_num(first.radius)}"]
        if first.init is not None:
            lines.append(f"init = {_fmt_vec(first.init)}")
        for e in exps:
            op = e.optimizer
            lines += ["", f"[optimizer.{e.experiment_id}]", f"kind = {op.kind.value}",
                      f"gamma = {_fmt_auto(op.gamma)}", f"alpha = {_fmt_auto(op.alpha)}",
                      f"beta = {_num(op.beta)}", f"epsilon = {_num(op.epsilon)}"]
    s = config.separation
    if s is not None:
        if lines:
            lines.append("")
        lines += ["[separation]"] + [
            f"{k} = {_num(getattr(s, k))}" for k in
            ("kappa_min", "kappa_max", "gamma_bar", "epsilon", "beta", "delta")]
        lines += [f"budget = {s.budget}", f"init = {_fmt_vec(s.init)}"]
        if s.minimizer is not None:
            lines.append(f"minimizer = {_fmt_vec(s.minimizer)}")
    return "\n".join(lines) + "\n"


def with_overrides(config: Config, seed=None, budget=None) -> Config:
    """Apply CLI ``--seed``/``--budget`` overrides."""
    exps = config.experiments
    sep = config.separation
    if seed is not None:
        exps = tuple(replace(e, seed=seed) for e in exps)
    if budget is not None:
        exps = tuple(replace(e, budget=budget) for e in exps)
        if sep is not None:
            sep = replace(sep, budget=budget)
    return Config(exps, sep)
