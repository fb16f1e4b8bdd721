"""Adaptive switching between an online policy and prediction-driven plans.

The runner alternates two states.  In the conservative state it follows a
restartable online policy and watches how much value the current window has
made available; once that crosses a threshold it has banked enough slack to
gamble on the prediction.  In the predictive state it follows offline plans
computed against the predicted continuation and tracks the accumulated
(capped) prediction error, reverting to conservative once the error budget
is spent.

Four variants are provided: reward maximization or cost minimization,
crossed with an exact offline solver or a multiplicative-approximation
("gamma") solver.  The gamma variants replace per-period re-solving with
batched plans and estimate the online policy's running value by Monte Carlo
simulation.  All threshold formulas live in :func:`threshold_table`.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .framework import (
    MAXIMIZE,
    MINIMIZE,
    ConfigurationError,
    ProblemInstance,
    RequestSequence,
    Simulator,
    Trajectory,
    sequence_distance,
)

CONSERVATIVE = "conservative"
PREDICTIVE = "predictive"

ERROR_BASED = "error-based"
REGRET_BASED = "regret-based"


def child_seed(root: int, *labels: Any) -> int:
    """Derive a child RNG seed from the root seed and a label tuple.

    The split is a SHA-256 of the repr of (root, *labels), truncated to 64
    bits.  Live policy actions draw from a stream per (purpose, phase,
    period) and Monte Carlo rollouts from one per (purpose, period, rollout
    index), so any single decision point is reproducible in isolation.
    """
    digest = hashlib.sha256(repr((root,) + labels).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def stream(root: int, *labels: Any) -> random.Random:
    return random.Random(child_seed(root, *labels))


@dataclass(frozen=True)
class AdaSwitchConfig:
    """Parameters of one switching run.

    ``b`` and ``c`` are the threshold parameters (set to the problem's
    Lipschitz slope and max(saturation, influence) respectively), ``alpha``
    the batch parameter of the gamma variants.  ``monte_carlo_base_H`` and
    ``monte_carlo_cap`` bound the rollout count ``min(H * t^5, cap)``.
    """

    epsilon: float
    b: float
    c: float
    alpha: Optional[float] = None
    monte_carlo_base_H: int = 1
    monte_carlo_cap: int = 10_000
    seed: int = 0
    switching_mode: str = ERROR_BASED
    objective: str = MAXIMIZE
    oracle_kind: str = "exact"


@dataclass(frozen=True)
class Thresholds:
    conservative_exit: float
    predictive_exit: float
    batch_stop: Optional[float] = None
    needs_opt_estimate: bool = False


def threshold_table(config: AdaSwitchConfig, eta: float, gamma: float,
                    L: float) -> Thresholds:
    """Switching thresholds per (objective, oracle kind).

    conservative_exit bounds the monitored window value ``s``; the run
    enters the predictive state at ``s >= conservative_exit``.
    predictive_exit bounds the accumulated capped error ``phi`` (inclusive
    comparison).  The gamma variants also stop extending a batch once its
    planned value reaches ``batch_stop``, and the cost/gamma variant
    additionally requires the approximate window optimum ``u >= gamma``.
    """
    e, b, c, a = config.epsilon, config.b, config.c, config.alpha
    if config.objective == MAXIMIZE and config.oracle_kind == "exact":
        thr = Thresholds(10 * c * L / e, 2 * c / (eta * b))
    elif config.objective == MAXIMIZE and config.oracle_kind == "gamma":
        slack = eta - 15 * e / 16
        thr = Thresholds(
            (16 * eta / e) * a * c * L,
            gamma * a / (slack * (a + gamma)) * (5 * a * c / b),
            batch_stop=a * c * L)
    elif config.objective == MINIMIZE and config.oracle_kind == "exact":
        thr = Thresholds(10 * (eta + e) * c * L / e, 2 * (eta + e) * c / b)
    elif config.objective == MINIMIZE and config.oracle_kind == "gamma":
        thr = Thresholds(
            (18 * eta / e) * (eta + e) * gamma * a * c * L,
            5 * (eta + e) * a * c / b,
            batch_stop=a * c * L,
            needs_opt_estimate=True)
    else:
        raise ConfigurationError(
            f"unknown variant ({config.objective}, {config.oracle_kind})")
    if thr.conservative_exit <= 0 or thr.predictive_exit <= 0:
        raise ConfigurationError("thresholds must be strictly positive")
    return thr


def validate_config(config: AdaSwitchConfig, eta: float, gamma: float) -> None:
    """Raise ConfigurationError naming the first violated precondition."""
    if config.objective not in (MAXIMIZE, MINIMIZE):
        raise ConfigurationError(f"objective must be max or min, got {config.objective!r}")
    if config.oracle_kind not in ("exact", "gamma"):
        raise ConfigurationError(f"oracle_kind must be exact or gamma, got {config.oracle_kind!r}")
    if config.switching_mode not in (ERROR_BASED, REGRET_BASED):
        raise ConfigurationError(f"unknown switching mode {config.switching_mode!r}")
    if config.switching_mode == REGRET_BASED and config.oracle_kind != "exact":
        raise ConfigurationError("regret-based switching requires the exact offline oracle")
    if config.switching_mode == REGRET_BASED and config.objective != MAXIMIZE:
        raise ConfigurationError("regret-based switching is defined for the reward objective")
    if not (config.c >= config.b >= 1):
        raise ConfigurationError(f"need c >= b >= 1, got c={config.c}, b={config.b}")
    if config.epsilon <= 0:
        raise ConfigurationError("epsilon must be positive")
    if config.objective == MAXIMIZE and config.epsilon >= eta:
        raise ConfigurationError(
            f"epsilon must lie in (0, eta), got epsilon={config.epsilon}, eta={eta}")
    if config.oracle_kind == "gamma":
        a = config.alpha
        if a is None:
            raise ConfigurationError("gamma variants need the batch parameter alpha")
        if config.objective == MAXIMIZE:
            if a < 3:
                raise ConfigurationError(f"need alpha >= 3, got {a}")
            if gamma * a / (a + gamma) < eta - 15 * config.epsilon / 16 - 1e-12:
                raise ConfigurationError(
                    f"infeasible batch parameter: gamma*alpha/(alpha+gamma)="
                    f"{gamma * a / (a + gamma):.6g} < eta - 15*epsilon/16 = "
                    f"{eta - 15 * config.epsilon / 16:.6g}")
        else:
            floor = max(16 * gamma, gamma + 2 * gamma * gamma / config.epsilon)
            if a < floor - 1e-12:
                raise ConfigurationError(
                    f"need alpha >= max(16*gamma, gamma + 2*gamma^2/epsilon) = {floor:.6g}, "
                    f"got {a}")


class WindowMonitor:
    """Running hindsight optimum of the window that started at ``t0``."""

    def append(self, t: int, request: Any) -> float:
        raise NotImplementedError


class ResolveMonitor(WindowMonitor):
    """Generic monitor: re-solves the window from a state snapshot on every
    append.  Applications with incremental structure override this."""

    def __init__(self, oracle: "OfflineOracle", sim: Simulator, t0: int):
        self.oracle = oracle
        self.snapshot = sim.clone()
        self.t0 = t0
        self.window: list[Any] = []

    def append(self, t: int, request: Any) -> float:
        self.window.append(request)
        value, _ = self.oracle.solve(self.snapshot.clone(), self.t0, self.window)
        return value


class OfflineOracle:
    """Hindsight solver conditioned on a simulator state.

    ``solve`` returns ``(value, actions)`` for the window starting at
    absolute period ``t0``; ``gamma`` is its approximation guarantee
    (1.0 for exact oracles).  The simulator passed in may be consumed.
    """

    gamma: float = 1.0

    def solve(self, sim: Simulator, t0: int, window: Sequence[Any]) -> tuple[float, list]:
        raise NotImplementedError

    def monitor(self, sim: Simulator, t0: int) -> WindowMonitor:
        return ResolveMonitor(self, sim, t0)


class OnlinePolicy:
    """One restarted instance of an online oracle."""

    def act(self, t: int, request: Any, rng: random.Random) -> Any:
        raise NotImplementedError


class OnlineOracle:
    """Restartable family of online policies with competitiveness ``eta``.

    ``restart(sim, m)`` returns the policy that treats period ``m`` as the
    end of history; it may read the simulator's current state.
    ``deterministic`` policies are replayed with a single rollout wherever a
    Monte Carlo estimate is called for.
    """

    eta: float = 1.0
    deterministic: bool = True

    def restart(self, sim: Simulator, m: int) -> OnlinePolicy:
        raise NotImplementedError


@dataclass
class CompetitiveReport:
    """Outcome of one switching run plus everything needed to audit it."""

    instance_id: str
    seed: int
    variant: str
    epsilon: float
    b: float
    c: float
    alpha: Optional[float]
    eta: float
    gamma: float
    val: float
    opt: Optional[float]
    phi_star: float
    switch_count: int
    epochs: tuple[tuple[int, str], ...]
    bounds: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    mc_deviation: bool = False
    fallback_fired: bool = False
    trajectory: Optional[Trajectory] = None

    CSV_HEADER = ("instance,seed,variant,epsilon,b,c,alpha,val,opt,ratio,"
                  "phi_star,switches,bound_T1,bound_T2,mc_deviation")

    @property
    def ratio(self) -> Optional[float]:
        if self.opt is None or self.opt == 0:
            return None
        return self.val / self.opt

    @property
    def ratio_undefined(self) -> bool:
        return self.opt is None or self.opt == 0

    def csv_row(self) -> str:
        ratio = "" if self.ratio is None else _fmt(self.ratio)
        cells = [
            self.instance_id, str(self.seed), self.variant,
            _fmt(self.epsilon), _fmt(self.b), _fmt(self.c),
            "" if self.alpha is None else _fmt(self.alpha),
            _fmt(self.val), "" if self.opt is None else _fmt(self.opt),
            ratio, _fmt(self.phi_star), str(self.switch_count),
            _fmt(self.bounds.get("T1", self.bounds.get("T3", math.nan))),
            _fmt(self.bounds.get("T2", self.bounds.get("T4", math.nan))),
            "1" if self.mc_deviation else "0",
        ]
        return ",".join(cells)


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(float(x))


class _Plan:
    """Offline plan anchored at a start period; one action per period."""

    __slots__ = ("start", "actions")

    def __init__(self, start: int, actions: Sequence[Any]):
        self.start = start
        self.actions = list(actions)

    def covers(self, t: int) -> bool:
        return self.start <= t < self.start + len(self.actions)

    def action_at(self, t: int) -> Any:
        return self.actions[t - self.start]


def _first_action(problem: ProblemInstance, t: int, e: Any) -> Any:
    """Lexicographically first action of period ``t`` - the documented
    choice wherever the algorithm says "any action"."""
    for a in problem.action_space(t, e):
        return a
    raise ConfigurationError(f"empty action set at period {t}")


def monte_carlo_estimate(problem: ProblemInstance, prefix: Trajectory,
                         window: Sequence[Any], online_oracle: OnlineOracle,
                         t: int, config: AdaSwitchConfig) -> float:
    """Estimated value of the online policy restarted after ``prefix`` and
    run over ``window``: the mean of ``min(H * t^5, cap)`` rollouts, or one
    exact rollout when the policy is declared deterministic."""
    snapshot = problem.new_simulator(prefix)
    value, _ = _mc_estimate(problem, snapshot, list(window), online_oracle,
                            prefix.m + 1, t, config)
    return value


def _mc_estimate(problem: ProblemInstance, snapshot: Simulator,
                 window: list[Any], oracle: OnlineOracle, tau: int, t: int,
                 config: AdaSwitchConfig) -> tuple[float, bool]:
    if oracle.deterministic:
        n = 1
        capped = False
    else:
        budget = config.monte_carlo_base_H * t ** 5
        n = min(budget, config.monte_carlo_cap)
        capped = budget > config.monte_carlo_cap
    total = 0.0
    for j in range(n):
        sim = snapshot.clone()
        policy = oracle.restart(sim, tau - 1)
        rng = stream(config.seed, "mc", t, j)  # one stream per rollout
        rollout = 0.0
        for i, e in enumerate(window):
            period = tau + i
            a = policy.act(period, e, rng)
            rollout += sim.step(period, e, a)
        total += rollout
    return total / n, capped


def regret_based_switch_check(eta: float, epsilon: float, c: float, L: float,
                              phase_opt: float, phase_val: float) -> bool:
    """Alternative predictive-exit rule tracking reward regret instead of
    raw prediction error.  Fires (inclusively) once
    ``(eta - epsilon) * Opt(phase) - Val(phase)`` reaches
    ``9cL - 2(eta - epsilon)cL - (eta - epsilon)L``."""
    regret = (eta - epsilon) * phase_opt - phase_val
    threshold = 9 * c * L - 2 * (eta - epsilon) * c * L - (eta - epsilon) * L
    return regret >= threshold


def _estimate_horizon(problem: ProblemInstance, t: int,
                      prediction: RequestSequence, fallback: int) -> int:
    if problem.estimate_m is None:
        return max(fallback, t)
    return max(problem.estimate_m(t, prediction), t)


def run_adaswitch_exact(problem: ProblemInstance, requests: RequestSequence,
                        prediction: RequestSequence,
                        offline_oracle: OfflineOracle,
                        online_oracle: OnlineOracle,
                        config: AdaSwitchConfig,
                        start_prefix: Optional[Trajectory] = None,
                        instance_id: str = "") -> CompetitiveReport:
    """Two-state switching loop with an exact (gamma = 1) offline oracle.

    Handles both objectives; the cost flavor differs only in its thresholds
    and in the offline solver minimizing.  In the predictive state the plan
    against (observed request, predicted suffix) is recomputed whenever the
    prediction misses; while it matches, continuing the cached plan realizes
    the same value as re-solving every period, since any suffix of an
    optimal plan stays optimal along the predicted path.
    """
    eta = online_oracle.eta
    if offline_oracle.gamma != 1.0:
        raise ConfigurationError("run_adaswitch_exact needs an exact offline oracle")
    validate_config(config, eta, 1.0)
    L = problem.reward_bound
    thr = threshold_table(config, eta, 1.0, L)
    cap = config.c / config.b

    sim = problem.new_simulator(start_prefix)
    t0 = (start_prefix.m if start_prefix is not None else 0) + 1
    horizon = requests.effective_length

    mode = CONSERVATIVE
    tau = t0
    policy = online_oracle.restart(sim, tau - 1)
    monitor = offline_oracle.monitor(sim, tau)
    phase_monitor: Optional[WindowMonitor] = None  # regret mode only
    phase_val = 0.0
    plan: Optional[_Plan] = None
    phi = 0.0
    total = 0.0
    switches = 0
    epochs: list[tuple[int, str]] = [(tau, CONSERVATIVE)] if t0 <= horizon else []
    prefix = start_prefix if start_prefix is not None else Trajectory()
    log_requests = list(prefix.requests)
    log_actions = list(prefix.actions)
    log_rewards = list(prefix.rewards)

    def record(e, a, r):
        log_requests.append(e)
        log_actions.append(a)
        log_rewards.append(r)

    for t in range(t0, horizon + 1):
        e = requests.at(t)
        if mode == CONSERVATIVE:
            a = policy.act(t, e, stream(config.seed, "online", tau, t))
            problem.check_action(t, e, a)
            r = sim.step(t, e, a)
            record(e, a, r)
            total += r
            s = monitor.append(t, e)
            if s >= thr.conservative_exit and t < horizon:
                mode = PREDICTIVE
                phi = 0.0
                plan = None
                phase_val = 0.0
                if config.switching_mode == REGRET_BASED:
                    phase_monitor = offline_oracle.monitor(sim, t + 1)
                epochs.append((t + 1, PREDICTIVE))
        else:
            e_pred = prediction.at(t)
            if plan is None or not plan.covers(t) or e != e_pred:
                hp = _estimate_horizon(problem, t, prediction, horizon)
                window = [e] + prediction.window(t + 1, hp)
                _, actions = offline_oracle.solve(sim.clone(), t, window)
                plan = _Plan(t, actions)
            a = plan.action_at(t)
            problem.check_action(t, e, a)
            r = sim.step(t, e, a)
            record(e, a, r)
            total += r
            phi += min(problem.distance_fn(e, e_pred), cap)
            if config.switching_mode == REGRET_BASED:
                phase_val += r
                phase_opt = phase_monitor.append(t, e)
                revert = regret_based_switch_check(eta, config.epsilon, config.c,
                                                   L, phase_opt, phase_val)
            else:
                revert = phi >= thr.predictive_exit
            if revert and t < horizon:
                mode = CONSERVATIVE
                tau = t + 1
                switches += 1
                policy = online_oracle.restart(sim, tau - 1)
                monitor = offline_oracle.monitor(sim, tau)
                epochs.append((tau, CONSERVATIVE))
            elif revert:
                switches += 1

    traj = Trajectory(tuple(log_requests), tuple(log_actions), tuple(log_rewards))
    phi_star = sequence_distance(problem, requests, prediction, cap=cap).capped_total
    prefix_val = start_prefix.cumulative if start_prefix is not None else 0.0

    opt_value, _ = offline_oracle.solve(problem.new_simulator(), 1,
                                        requests.window(1, horizon))
    report = CompetitiveReport(
        instance_id=instance_id, seed=config.seed,
        variant=f"exact-{config.objective}",
        epsilon=config.epsilon, b=config.b, c=config.c, alpha=config.alpha,
        eta=eta, gamma=1.0,
        val=prefix_val + total, opt=opt_value,
        phi_star=phi_star, switch_count=switches, epochs=tuple(epochs),
        trajectory=traj)
    _attach_core_bound(report, config, problem)
    return report


def run_adaswitch_gamma(problem: ProblemInstance, requests: RequestSequence,
                        prediction: RequestSequence,
                        gamma_oracle: OfflineOracle,
                        online_oracle: OnlineOracle,
                        config: AdaSwitchConfig,
                        start_prefix: Optional[Trajectory] = None,
                        instance_id: str = "") -> CompetitiveReport:
    """Batched switching loop for approximate offline oracles.

    The conservative monitor is a Monte Carlo estimate of the online
    policy's value over the current window (exact single rollout for
    deterministic policies).  Predictive periods run in batches: each batch
    is grown one predicted period at a time, re-solved in one shot by the
    gamma oracle, until its planned value reaches the batch-stop threshold
    or the estimated horizon ends; the plan is then followed verbatim.  If
    the horizon ends first, the run falls back to lexicographically-first
    actions for the rest of the phase and flags that the fallback fired.
    """
    eta = online_oracle.eta
    gamma = gamma_oracle.gamma
    validate_config(config, eta, gamma)
    L = problem.reward_bound
    thr = threshold_table(config, eta, gamma, L)
    cap = config.c / config.b

    sim = problem.new_simulator(start_prefix)
    t0 = (start_prefix.m if start_prefix is not None else 0) + 1
    horizon = requests.effective_length

    mode = CONSERVATIVE
    tau = t0
    policy = online_oracle.restart(sim, tau - 1)
    phase_snapshot = sim.clone()
    phase_window: list[Any] = []
    phase_val = 0.0
    plan: Optional[_Plan] = None
    tau_p: Optional[int] = None  # None while conservative; math.inf after fallback
    phi = 0.0
    total = 0.0
    switches = 0
    mc_deviation = False
    fallback_fired = False
    epochs: list[tuple[int, str]] = [(tau, CONSERVATIVE)] if t0 <= horizon else []
    prefix = start_prefix if start_prefix is not None else Trajectory()
    log_requests = list(prefix.requests)
    log_actions = list(prefix.actions)
    log_rewards = list(prefix.rewards)

    def record(e, a, r):
        log_requests.append(e)
        log_actions.append(a)
        log_rewards.append(r)

    for t in range(t0, horizon + 1):
        e = requests.at(t)
        if mode == CONSERVATIVE:
            a = policy.act(t, e, stream(config.seed, "online", tau, t))
            problem.check_action(t, e, a)
            r = sim.step(t, e, a)
            record(e, a, r)
            total += r
            phase_window.append(e)
            phase_val += r
            if online_oracle.deterministic:
                s = phase_val
            else:
                s, capped = _mc_estimate(problem, phase_snapshot, phase_window,
                                         online_oracle, tau, t, config)
                mc_deviation = mc_deviation or capped
            ok = s >= thr.conservative_exit
            if ok and thr.needs_opt_estimate:
                u, _ = gamma_oracle.solve(phase_snapshot.clone(), tau, phase_window)
                ok = u >= gamma
            if ok and t < horizon:
                mode = PREDICTIVE
                tau_p = t + 1
                phi = 0.0
                plan = None
                epochs.append((t + 1, PREDICTIVE))
        else:
            if tau_p is not None and t == tau_p:
                # A new batch starts: grow it one predicted period at a time.
                hp = _estimate_horizon(problem, t, prediction, horizon)
                plan_value = 0.0
                plan_actions: list = []
                tp = tau_p
                while tp <= hp and plan_value < thr.batch_stop:
                    window = [e] + prediction.window(t + 1, tp)
                    plan_value, plan_actions = gamma_oracle.solve(sim.clone(), t, window)
                    tp += 1
                if plan_value < thr.batch_stop:
                    tau_p = None  # no further batches this phase
                    plan = None
                    fallback_fired = True
                else:
                    tau_p = tp
                    plan = _Plan(t, plan_actions)
            if plan is not None and plan.covers(t):
                a = plan.action_at(t)
            else:
                a = _first_action(problem, t, e)
            problem.check_action(t, e, a)
            r = sim.step(t, e, a)
            record(e, a, r)
            total += r
            phi += min(problem.distance_fn(e, prediction.at(t)), cap)
            if phi >= thr.predictive_exit:
                switches += 1
                if t < horizon:
                    mode = CONSERVATIVE
                    tau = t + 1
                    policy = online_oracle.restart(sim, tau - 1)
                    phase_snapshot = sim.clone()
                    phase_window = []
                    phase_val = 0.0
                    plan = None
                    tau_p = None
                    epochs.append((tau, CONSERVATIVE))

    traj = Trajectory(tuple(log_requests), tuple(log_actions), tuple(log_rewards))
    phi_star = sequence_distance(problem, requests, prediction, cap=cap).capped_total
    prefix_val = start_prefix.cumulative if start_prefix is not None else 0.0

    opt_value, _ = gamma_oracle.solve(problem.new_simulator(), 1,
                                      requests.window(1, horizon))
    flags: tuple[str, ...] = ()
    if gamma != 1.0:
        flags += ("opt-approx",)
    report = CompetitiveReport(
        instance_id=instance_id, seed=config.seed,
        variant=f"gamma-{config.objective}",
        epsilon=config.epsilon, b=config.b, c=config.c, alpha=config.alpha,
        eta=eta, gamma=gamma,
        val=prefix_val + total, opt=opt_value,
        phi_star=phi_star, switch_count=switches, epochs=tuple(epochs),
        flags=flags, mc_deviation=mc_deviation, fallback_fired=fallback_fired,
        trajectory=traj)
    _attach_core_bound(report, config, problem)
    return report


def run_adaswitch_cost(problem: ProblemInstance, requests: RequestSequence,
                       prediction: RequestSequence,
                       offline_oracle: OfflineOracle,
                       online_oracle: OnlineOracle,
                       config: AdaSwitchConfig,
                       start_prefix: Optional[Trajectory] = None,
                       instance_id: str = "") -> CompetitiveReport:
    """Cost-minimization wrapper: same machinery under the cost thresholds."""
    if config.objective != MINIMIZE:
        raise ConfigurationError("run_adaswitch_cost requires objective=min")
    runner = run_adaswitch_exact if config.oracle_kind == "exact" else run_adaswitch_gamma
    report = runner(problem, requests, prediction, offline_oracle,
                    online_oracle, config, start_prefix=start_prefix,
                    instance_id=instance_id)
    if report.ratio_undefined:
        report.flags += ("ratio-undefined",)
    return report


def _attach_core_bound(report: CompetitiveReport, config: AdaSwitchConfig,
                       problem: ProblemInstance) -> None:
    """Fill in the meta-theorem bound matching the variant that ran."""
    if report.opt is None or report.opt <= 0:
        return
    common = dict(eta=report.eta, epsilon=report.epsilon, b=report.b,
                  c=report.c, L=problem.reward_bound, opt=report.opt,
                  phi_star=report.phi_star)
    try:
        if config.objective == MAXIMIZE and config.oracle_kind == "exact":
            report.bounds["T1"] = theoretical_bound("T1", **common)
        elif config.objective == MAXIMIZE:
            report.bounds["T2"] = theoretical_bound(
                "T2", gamma=report.gamma, alpha=report.alpha, **common)
        elif config.oracle_kind == "exact":
            report.bounds["T3"] = theoretical_bound("T3", **common)
        else:
            report.bounds["T4"] = theoretical_bound(
                "T4", gamma=report.gamma, alpha=report.alpha, **common)
    except ConfigurationError:
        pass  # bound preconditions not met for this run; leave it out


def _require(kw: dict, names: Sequence[str], theorem: str) -> list[float]:
    out = []
    for n in names:
        if n not in kw or kw[n] is None:
            raise ConfigurationError(f"{theorem} needs input {n!r}")
        out.append(kw[n])
    return out


def theoretical_bound(theorem: str, **kw: float) -> float:
    """Closed-form competitive-ratio bound evaluators.

    T1/T1pre: exact-oracle reward bound against the realized / predicted
    optimum.  T2/T2pre: the gamma-oracle analogues.  T3/T4: the cost
    variants.  T5: the lead-time-quotation instantiation.  T7: the caching
    instantiation.  Inputs outside a theorem's preconditions raise
    ConfigurationError naming the failed condition.
    """
    if theorem in ("T1", "T1pre"):
        eta, eps, b, c, L, opt, phi = _require(
            kw, ["eta", "epsilon", "b", "c", "L", "opt", "phi_star"], theorem)
        _check_reward_common(eta, eps, b, c, opt)
        if theorem == "T1":
            return max(eta - eps, 1 - L * (12 * c + 8 * b * eta * phi) / (eps * opt))
        return max(eta - eps, 1 - L * (14 * c + 9 * b * eta * phi) / (eps * opt))
    if theorem in ("T2", "T2pre"):
        eta, eps, gamma, alpha, b, c, L, opt, phi = _require(
            kw, ["eta", "epsilon", "gamma", "alpha", "b", "c", "L", "opt", "phi_star"],
            theorem)
        _check_reward_common(eta, eps, b, c, opt)
        if alpha < 3:
            raise ConfigurationError("T2 requires alpha >= 3")
        if gamma * alpha / (alpha + gamma) < eta - 15 * eps / 16 - 1e-12:
            raise ConfigurationError("T2 requires gamma*alpha/(alpha+gamma) >= eta - 15*epsilon/16")
        if theorem == "T2":
            return max(eta - eps,
                       gamma - gamma ** 2 / alpha
                       - L * (18 * alpha * c + 7 * b * eta * phi / gamma) / (eps * opt))
        return max(eta - eps,
                   gamma - gamma ** 2 / alpha
                   - L * (21 * alpha * c + 8 * b * eta * phi / gamma) / (eps * opt))
    if theorem == "T3":
        eta, eps, b, c, L, opt, phi = _require(
            kw, ["eta", "epsilon", "b", "c", "L", "opt", "phi_star"], theorem)
        _check_cost_common(eps, b, c, opt)
        return min(eta + eps,
                   1 + L * (14 * eta * (eta + eps) * c + (7 * eta + 2 * eps) * b * phi)
                   / (eps * opt))
    if theorem == "T4":
        eta, eps, gamma, alpha, b, c, L, opt, phi = _require(
            kw, ["eta", "epsilon", "gamma", "alpha", "b", "c", "L", "opt", "phi_star"],
            theorem)
        _check_cost_common(eps, b, c, opt)
        if alpha < max(16 * gamma, gamma + 2 * gamma ** 2 / eps) - 1e-12:
            raise ConfigurationError("T4 requires alpha >= max(16*gamma, gamma + 2*gamma^2/epsilon)")
        return min(eta + eps,
                   gamma + gamma ** 2 / (alpha - gamma)
                   + L * (19 * gamma * alpha * eta * (eta + eps) * c
                          + (4 * eta + 3 * eps) * gamma * b * phi) / (eps * opt))
    if theorem == "T5":
        eta, eps, ell, opt, phi = _require(
            kw, ["eta", "epsilon", "ell", "opt", "phi_star"], theorem)
        if not 0 < eps < eta:
            raise ConfigurationError("T5 requires epsilon in (0, eta)")
        if opt <= 0:
            raise ConfigurationError("T5 requires opt > 0")
        return max(eta - eps, 1 - ell * (24 * ell + 8 * eta * phi) / (eps * opt))
    if theorem == "T7":
        k, opt, phi = _require(kw, ["k", "opt", "phi_star"], theorem)
        if k < 1:
            raise ConfigurationError("T7 requires k >= 1")
        if opt <= 0:
            raise ConfigurationError("T7 requires opt > 0")
        return 1 + min(4 * (math.log(k) + 1),
                       (56 * k * (math.log(k) + 1) + 18 * phi) / opt)
    raise ConfigurationError(f"unknown theorem {theorem!r}")


def _check_reward_common(eta, eps, b, c, opt):
    if not 0 < eps < eta:
        raise ConfigurationError("reward bounds require epsilon in (0, eta)")
    if not c >= b >= 1:
        raise ConfigurationError("reward bounds require c >= b >= 1")
    if opt <= 0:
        raise ConfigurationError("bounds require opt > 0")


def _check_cost_common(eps, b, c, opt):
    if eps <= 0:
        raise ConfigurationError("cost bounds require epsilon > 0")
    if not c >= b >= 1:
        raise ConfigurationError("cost bounds require c >= b >= 1")
    if opt <= 0:
        raise ConfigurationError("bounds require opt > 0")
