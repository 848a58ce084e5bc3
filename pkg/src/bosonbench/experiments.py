"""Named experiments and the record/config plumbing behind the CLI.

Every experiment is a function ``config -> ExperimentRecord``.  Trial ``t``
draws its randomness from ``root.spawn(1).spawn(t)`` and shared setup (such as
the interferometer) from ``root.spawn(0)``, where ``root`` is derived from the
seed and the experiment name.  Re-running a record's config echo therefore
reproduces its per-trial results exactly.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
import time
import zlib
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .certification import (
    ACCEPT,
    birthday_bound_valid,
    birthday_lower_bound,
    discrimination_error_bound,
    eta,
    fingerprint,
    fingerprint_triviality_bound,
    flatness,
    is_trivial_fingerprint,
    likelihood_ratio_test,
    min_samples_negative,
    minimal_a,
    one_norm_distance,
    relative_entropy,
    renyi_relative_entropy,
    symmetric_certifier,
)
from .distribution import (
    DEFAULT_CAP,
    beamsplitter,
    collision_free_fraction,
    draw_indices,
    enumerate_sample_space,
    full_distribution,
    outcome_probabilities,
    postselected_distribution,
    uniform_distribution,
)
from .errors import BosonBenchError, ParameterError, RangeError
from .flatness import (
    complex_entry_exceedance,
    empirical_flatness,
    flatness_threshold,
    gaussian_concentration_bound,
    log_sample_space_bound,
    permanent_moment_mc,
    stirling_upper,
    theorem_bound_evaluator,
)
from .gaussian import (
    BucketDetector,
    apply_channel,
    circuit_from_json,
    classical_sample,
    click_probabilities,
    coherent_state,
    identity_channel,
    lossy_channel,
    pattern_counts,
    vacuum_state,
)
from .linalg import haar_unitary
from .rng import RngStream

EXPERIMENTS = (
    "hom",
    "distribution",
    "flatness",
    "moments",
    "fingerprint",
    "birthday",
    "discriminate",
    "indistinguishability",
    "gaussian-sim",
    "bounds",
)


class ConfigError(BosonBenchError, ValueError):
    """Invalid experiment configuration; ``keys`` lists the offending entries."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = list(keys)


@dataclass
class ExperimentConfig:
    """Flat experiment configuration.  ``None`` means "use the experiment default"."""

    experiment: str
    seed: int = 0
    modes: int | None = None
    photons: int | None = None
    trials: int | None = None
    samples: int | None = None
    epsilon: float | None = None
    alpha: float | None = None
    radius: float | None = None
    sigma: float | None = None
    threshold: float | None = None
    cap: int = DEFAULT_CAP
    budget_seconds: float | None = None
    restricted: bool | None = None
    space_size: int | None = None
    sequences: int | None = None
    order: int | None = None
    eta: float | None = None
    coherent: float | None = None
    circuit: str | None = None
    out: str | None = None
    format: str = "json"

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}", unknown)
        if "experiment" not in data:
            raise ConfigError("missing experiment name", ["experiment"])
        kwargs = {}
        bad = []
        for key, value in data.items():
            try:
                kwargs[key] = _coerce(known[key].type, value)
            except (TypeError, ValueError):
                bad.append(key)
        if bad:
            raise ConfigError(f"could not parse values for: {', '.join(bad)}", bad)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        bad = []
        if self.experiment not in EXPERIMENTS:
            bad.append("experiment")
        positive_int = ("modes", "photons", "trials", "cap", "space_size", "sequences")
        for key in positive_int:
            v = getattr(self, key)
            if v is not None and v < 1:
                bad.append(key)
        if self.samples is not None and self.samples < 0:
            bad.append("samples")
        if self.seed < 0 or self.seed >= 2**64:
            bad.append("seed")
        for key in ("radius", "sigma", "threshold", "budget_seconds"):
            v = getattr(self, key)
            if v is not None and not v > 0:
                bad.append(key)
        if self.epsilon is not None and not 0 < self.epsilon <= 1:
            bad.append("epsilon")
        if self.alpha is not None and not 0 < self.alpha < 1:
            bad.append("alpha")
        if self.eta is not None and not 0 <= self.eta <= 1:
            bad.append("eta")
        if self.order is not None and self.order not in (2, 4):
            bad.append("order")
        if self.format not in ("json", "csv"):
            bad.append("format")
        if bad:
            raise ConfigError(f"invalid values for: {', '.join(bad)}", bad)

    def with_defaults(self) -> "ExperimentConfig":
        merged = dataclasses.replace(self)
        for key, value in DEFAULTS.get(self.experiment, {}).items():
            if getattr(merged, key) is None:
                setattr(merged, key, value)
        return merged

    def echo(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


def _coerce(annotation, value):
    if value is None:
        return None
    text = str(annotation)
    if "bool" in text:
        if isinstance(value, str):
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        return bool(value)
    if text.startswith("int"):
        if isinstance(value, float) and not value.is_integer():
            raise ValueError(value)
        return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
    if text.startswith("float"):
        return float(value)
    return str(value)


DEFAULTS = {
    "hom": {"samples": 0},
    "distribution": {"modes": 5, "photons": 2, "trials": 1, "restricted": False},
    "flatness": {"modes": 64, "photons": 4, "trials": 20, "restricted": True},
    "moments": {"modes": 20, "photons": 3, "trials": 100_000, "order": 2},
    "fingerprint": {"space_size": 10**6, "samples": 10, "sequences": 2, "trials": 10_000},
    "birthday": {"space_size": 10**4, "samples": 20, "trials": 100_000},
    "discriminate": {"modes": 27, "photons": 3, "trials": 1000, "alpha": 1 / 3, "restricted": False},
    "indistinguishability": {"modes": 32, "photons": 4, "samples": 15, "trials": 1000, "alpha": 1 / 3},
    "gaussian-sim": {"modes": 1, "samples": 10**6, "radius": 1.6, "coherent": 0.0, "eta": 1.0, "trials": 1},
    "bounds": {"modes": 243, "photons": 3, "epsilon": math.exp(-6)},
}


@dataclass
class ExperimentRecord:
    config: dict
    trials: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    version: str = __version__
    seed: int = 0
    complete: bool = True

    def summary_object(self) -> dict:
        return {
            "type": "summary",
            "config": self.config,
            "summary": self.summary,
            "bounds": self.bounds,
            "wall_clock": self.wall_clock,
            "version": self.version,
            "seed": self.seed,
            "complete": self.complete,
            "trial_count": len(self.trials),
        }

    def to_jsonl(self) -> str:
        lines = [json.dumps(_jsonable({"type": "trial", **t}), sort_keys=True) for t in self.trials]
        lines.append(json.dumps(_jsonable(self.summary_object()), sort_keys=True))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        import csv
        import io

        buf = io.StringIO()
        keys = sorted({k for t in self.trials for k in t})
        writer = csv.DictWriter(buf, fieldnames=keys)
        writer.writeheader()
        for t in self.trials:
            writer.writerow({k: json.dumps(_jsonable(v)) if isinstance(v, (list, dict)) else v for k, v in t.items()})
        return buf.getvalue()

    @classmethod
    def from_jsonl(cls, text: str) -> "ExperimentRecord":
        objs = [json.loads(line) for line in text.splitlines() if line.strip()]
        summary = objs[-1]
        if summary.get("type") != "summary":
            raise ValueError("record does not end with a summary object")
        trials = [{k: v for k, v in o.items() if k != "type"} for o in objs[:-1]]
        return cls(
            config=summary["config"],
            trials=trials,
            summary=summary["summary"],
            bounds=summary["bounds"],
            wall_clock=summary["wall_clock"],
            version=summary["version"],
            seed=summary["seed"],
            complete=summary["complete"],
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def atomic_write(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bosonbench-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class _Budget:
    def __init__(self, seconds):
        self.deadline = None if seconds is None else time.monotonic() + seconds

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline


def _root(cfg: ExperimentConfig) -> RngStream:
    return RngStream(cfg.seed, zlib.crc32(cfg.experiment.encode()))


def _se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n else math.nan


# ---------------------------------------------------------------------------
# experiments


def _hom(cfg, rec, budget):
    dist = full_distribution(beamsplitter(), 2)
    for i, S in enumerate(dist.space):
        rec.trials.append({"outcome": list(S), "probability": float(dist.probs[i])})
    rec.summary["probabilities"] = {"".join(map(str, S)): float(p) for S, p in zip(dist.space, dist.probs)}
    rec.summary["collision_free_mass"] = float(dist.prob((1, 1)))
    if cfg.samples:
        idx = draw_indices(dist, cfg.samples, _root(cfg).spawn(1))
        freq = np.bincount(idx, minlength=len(dist)) / cfg.samples
        rec.summary["empirical"] = {"".join(map(str, S)): float(f) for S, f in zip(dist.space, freq)}


def _distribution(cfg, rec, budget):
    m, n = cfg.modes, cfg.photons
    space = enumerate_sample_space(m, n, restricted=cfg.restricted, cap=cfg.cap)
    trials = _root(cfg).spawn(1)
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        U = haar_unitary(m, trials.spawn(t))
        raw = outcome_probabilities(U, space)
        dist = postselected_distribution(U, n, space=space) if cfg.restricted else full_distribution(U, n, space=space)
        eps, hmin = flatness(dist)
        rec.trials.append({
            "trial": t,
            "total_mass": float(raw.sum()),
            "normalization_error": float(abs(dist.probs.sum() - 1)),
            "epsilon": eps,
            "min_entropy_bits": hmin,
            "collision_free_fraction": collision_free_fraction(U, n, cap=cfg.cap) if n <= m else 0.0,
        })
        if t == 0 and len(space) <= 100_000:
            rec.summary["first_distribution"] = dist.to_json()
    rec.summary["sample_space_size"] = len(space)
    if rec.trials:
        rec.summary["max_normalization_error"] = max(t["normalization_error"] for t in rec.trials)
        rec.summary["mean_collision_free_fraction"] = float(np.mean([t["collision_free_fraction"] for t in rec.trials]))


def _flatness(cfg, rec, budget):
    m, n = cfg.modes, cfg.photons
    threshold = cfg.threshold if cfg.threshold is not None else flatness_threshold(n)
    remaining = None if budget.deadline is None else max(0.0, budget.deadline - time.monotonic())
    report = empirical_flatness(m, n, cfg.trials, cfg.restricted, _root(cfg).spawn(1), threshold=threshold,
                                cap=cfg.cap, budget_seconds=remaining)
    rec.complete = report.complete
    for t, (p, arg) in enumerate(zip(report.max_probs, report.argmax)):
        rec.trials.append({"trial": t, "max_prob": p, "argmax": arg, "exceeds": p >= threshold})
    size = len(enumerate_sample_space(m, n, restricted=cfg.restricted, cap=cfg.cap))
    rec.summary.update({
        "threshold": threshold,
        "exceedance": report.exceedance,
        "below_fraction": report.below_fraction,
        "completed_trials": report.completed_trials,
        "sample_space_size": size,
        "mean_max_prob": float(np.mean(report.max_probs)) if report.max_probs else math.nan,
        "margin_mean_prob": threshold * size if cfg.restricted else math.nan,
    })
    for variant in ("tail-chain", "moment-markov"):
        rec.bounds[variant] = theorem_bound_evaluator(n, m, threshold, variant).to_json()


def _moments(cfg, rec, budget):
    root = _root(cfg).spawn(1)
    orders = (cfg.order,)
    for i, order in enumerate(orders):
        est = permanent_moment_mc(cfg.photons, cfg.modes, order, cfg.trials, root.spawn(i), sigma=cfg.sigma)
        rec.trials.append(est.to_json())
    rec.summary["within_3se"] = [abs(t["z"]) <= 3 for t in rec.trials]


def _fingerprint(cfg, rec, budget):
    N, l, k = cfg.space_size, cfg.samples, cfg.sequences
    eps = 1.0 / N
    root = _root(cfg).spawn(1)
    nontrivial = 0
    done = 0
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        r = root.spawn(t)
        seqs = r.integers(0, N, size=(k, l)).tolist()
        C = fingerprint(seqs, N)
        trivial = is_trivial_fingerprint(C)
        nontrivial += not trivial
        done += 1
        rec.trials.append({"trial": t, "trivial": trivial, "nonzeros": C.to_json()["nonzeros"]})
    freq = nontrivial / done if done else math.nan
    rec.summary.update({"nontrivial_frequency": freq, "stderr": _se(freq, done), "epsilon": eps})
    try:
        rec.bounds["fingerprint_triviality"] = fingerprint_triviality_bound(k, l, eps, minimal_a(l, eps))
    except RangeError as exc:
        rec.bounds["fingerprint_triviality"] = None
        rec.bounds["note"] = str(exc)


def _birthday(cfg, rec, budget):
    N, l = cfg.space_size, cfg.samples
    eps = 1.0 / N
    root = _root(cfg).spawn(1)
    distinct = 0
    done = 0
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        draws = root.spawn(t).integers(0, N, size=l)
        ok = len(np.unique(draws)) == l
        distinct += ok
        done += 1
        rec.trials.append({"trial": t, "all_distinct": bool(ok)})
    freq = distinct / done if done else math.nan
    rec.summary.update({"all_distinct_frequency": freq, "stderr": _se(freq, done), "epsilon": eps})
    rec.bounds["valid"] = birthday_bound_valid(l, eps)
    rec.bounds["birthday_lower_bound"] = birthday_lower_bound(l, eps) if rec.bounds["valid"] else None


def _discrimination_setup(cfg, restricted):
    U = haar_unitary(cfg.modes, _root(cfg).spawn(0))
    if restricted:
        P = postselected_distribution(U, cfg.photons, cap=cfg.cap)
    else:
        P = full_distribution(U, cfg.photons, cap=cfg.cap)
    return P, uniform_distribution(P.space)


def _lr_errors(P, Q, l, trials, stream):
    wrong_p = wrong_q = 0
    for t in range(trials):
        r = stream.spawn(t)
        wrong_p += likelihood_ratio_test(P, Q, draw_indices(P, l, r.spawn(0))) == "Q"
        wrong_q += likelihood_ratio_test(P, Q, draw_indices(Q, l, r.spawn(1))) == "P"
    return wrong_p / trials, wrong_q / trials


def _discriminate(cfg, rec, budget):
    P, Q = _discrimination_setup(cfg, cfg.restricted)
    l_star = min_samples_negative(P, Q, cfg.alpha)
    l = cfg.samples if cfg.samples else (l_star if math.isfinite(l_star) else 1)
    root = _root(cfg).spawn(1)
    wrong_p = wrong_q = 0
    done = 0
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        r = root.spawn(t)
        dp = likelihood_ratio_test(P, Q, draw_indices(P, l, r.spawn(0)))
        dq = likelihood_ratio_test(P, Q, draw_indices(Q, l, r.spawn(1)))
        wrong_p += dp == "Q"
        wrong_q += dq == "P"
        done += 1
        rec.trials.append({"trial": t, "decision_on_P": dp, "decision_on_Q": dq})
    rec.summary.update({
        "l": l,
        "type_one": wrong_p / done if done else math.nan,
        "type_two": wrong_q / done if done else math.nan,
        "relative_entropy": relative_entropy(P, Q),
        "renyi_1/2": renyi_relative_entropy(P, Q, 0.5),
        "renyi_3/2": renyi_relative_entropy(P, Q, 1.5),
        "renyi_2": renyi_relative_entropy(P, Q, 2.0),
        "one_norm": one_norm_distance(P, Q),
        "eta": eta(P, Q),
    })
    rec.bounds.update({
        "min_samples_negative": l_star,
        "log_beta_rate_bound": discrimination_error_bound(P, Q, l, cfg.alpha),
    })


def indistinguishability_experiment(cfg: ExperimentConfig, rec: ExperimentRecord | None = None,
                                    budget: _Budget | None = None, lr_max_samples: int = 500) -> ExperimentRecord:
    """Symmetric collision certifier versus the likelihood-ratio certifier.

    Both are fed ``l`` samples from the post-selected distribution of one Haar
    interferometer and ``l`` samples from the uniform distribution over the
    collision-free outcomes.  Reports decision frequencies, the fingerprint-triviality
    bound from the measured flatness, and the smallest sample count (up to
    ``lr_max_samples``) at which the likelihood-ratio test has both error
    rates at most ``alpha``.
    """
    cfg = cfg.with_defaults()
    rec = rec or ExperimentRecord(config=cfg.echo(), seed=cfg.seed)
    budget = budget or _Budget(cfg.budget_seconds)
    P, Q = _discrimination_setup(cfg, restricted=True)
    N = len(P.space)
    l = cfg.samples
    eps = max(P.epsilon, Q.epsilon)
    root = _root(cfg).spawn(1)
    acc_p = acc_q = nontriv_p = nontriv_q = lr_p = lr_q = 0
    done = 0
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        r = root.spawn(t)
        sp = draw_indices(P, l, r.spawn(0)).tolist()
        sq = draw_indices(Q, l, r.spawn(1)).tolist()
        dp, dq = symmetric_certifier(sp, N), symmetric_certifier(sq, N)
        lp, lq = likelihood_ratio_test(P, Q, sp), likelihood_ratio_test(P, Q, sq)
        acc_p += dp == ACCEPT
        acc_q += dq == ACCEPT
        nontriv_p += len(set(sp)) < l
        nontriv_q += len(set(sq)) < l
        lr_p += lp == "Q"
        lr_q += lq == "P"
        done += 1
        rec.trials.append({"trial": t, "symmetric_on_P": dp, "symmetric_on_Q": dq, "lr_on_P": lp, "lr_on_Q": lq})
    if not done:
        rec.summary.update({"sample_space_size": N, "epsilon": eps, "l": l, "completed_trials": 0})
        return rec
    fp, fq = acc_p / done, acc_q / done
    try:
        lemma_bound = fingerprint_triviality_bound(1, l, eps, minimal_a(l, eps)) if l else 0.0
    except RangeError:
        lemma_bound = math.inf
    l_star = min_samples_negative(P, Q, cfg.alpha)
    lr_stream = _root(cfg).spawn(2)
    if math.isfinite(l_star) and l_star <= lr_max_samples:
        l_lr, source = int(l_star), "min_samples_negative"
        e1, e2 = _lr_errors(P, Q, l_lr, cfg.trials, lr_stream.spawn(l_lr))
    else:
        l_lr, source, e1, e2 = None, "search", math.nan, math.nan
        for cand in sorted({1, 2, 3, 5, 8, 12, 20, 30, 50, 80, 120, 200, 300, lr_max_samples}):
            if cand > lr_max_samples:
                break
            e1, e2 = _lr_errors(P, Q, cand, cfg.trials, lr_stream.spawn(cand))
            if e1 <= cfg.alpha and e2 <= cfg.alpha:
                l_lr = cand
                break
    rec.summary.update({
        "sample_space_size": N,
        "epsilon": eps,
        "min_entropy_bits": -math.log2(eps),
        "l": l,
        "completed_trials": done,
        "symmetric_accept_on_P": fp,
        "symmetric_accept_on_Q": fq,
        "symmetric_gap": abs(fp - fq),
        "symmetric_gap_stderr": math.sqrt(fp * (1 - fp) / done + fq * (1 - fq) / done),
        "nontrivial_on_P": nontriv_p / done,
        "nontrivial_on_Q": nontriv_q / done,
        "lr_type_one_at_l": lr_p / done,
        "lr_type_two_at_l": lr_q / done,
        "lr_samples": l_lr,
        "lr_samples_source": source,
        "lr_type_one": e1,
        "lr_type_two": e2,
        "relative_entropy": relative_entropy(P, Q),
        "renyi_3/2": renyi_relative_entropy(P, Q, 1.5),
    })
    rec.bounds.update({"fingerprint_triviality": lemma_bound, "min_samples_negative": l_star})
    return rec


def _indistinguishability(cfg, rec, budget):
    indistinguishability_experiment(cfg, rec, budget)


def _gaussian_sim(cfg, rec, budget):
    if cfg.circuit:
        with open(cfg.circuit) as fh:
            state, channel, detector = circuit_from_json(json.load(fh))
    else:
        m = cfg.modes
        amp = cfg.coherent or 0.0
        state = coherent_state([[amp, 0.0]] * m) if amp else vacuum_state(m)
        channel = lossy_channel(cfg.eta, m) if cfg.eta < 1 else identity_channel(m)
        detector = BucketDetector(cfg.radius)
    root = _root(cfg).spawn(1)
    exact = click_probabilities(apply_channel(state, channel), detector)
    for t in range(cfg.trials):
        if budget.expired():
            rec.complete = False
            break
        bits = classical_sample(state, channel, detector, cfg.samples, root.spawn(t))
        rates = bits.mean(axis=0)
        rec.trials.append({
            "trial": t,
            "click_rates": rates.tolist(),
            "stderr": np.sqrt(rates * (1 - rates) / cfg.samples).tolist(),
            "pattern_counts": pattern_counts(bits) if state.m <= 12 else None,
        })
    rec.summary.update({"modes": state.m, "radius": detector.R, "dark_count_rate": detector.dark_count_rate})
    rec.bounds["exact_click_probabilities"] = exact.tolist()


def _bounds(cfg, rec, budget):
    n, m = cfg.photons, cfg.modes
    eps = cfg.epsilon
    for variant in ("tail-chain", "moment-markov"):
        rec.trials.append({"variant": variant, **theorem_bound_evaluator(n, m, eps, variant).to_json()})
    sigma = cfg.sigma or 1 / math.sqrt(m)
    xi = cfg.threshold or 3 * sigma
    rec.bounds.update({
        "gaussian_concentration": gaussian_concentration_bound(n, sigma, xi),
        "complex_entry_exceedance": complex_entry_exceedance(n, sigma, xi),
        "stirling_upper": stirling_upper(n),
        "factorial": math.factorial(n),
        "log_sample_space": math.log(math.comb(m + n - 1, n)),
        "log_sample_space_bound": log_sample_space_bound(n, m / n**2, 2.0),
    })


RUNNERS = {
    "hom": _hom,
    "distribution": _distribution,
    "flatness": _flatness,
    "moments": _moments,
    "fingerprint": _fingerprint,
    "birthday": _birthday,
    "discriminate": _discriminate,
    "indistinguishability": _indistinguishability,
    "gaussian-sim": _gaussian_sim,
    "bounds": _bounds,
}


def run(config: ExperimentConfig | dict) -> ExperimentRecord:
    """Run one named experiment and, if ``config.out`` is set, write its record atomically."""
    cfg = config if isinstance(config, ExperimentConfig) else ExperimentConfig.from_mapping(config)
    cfg.validate()
    cfg = cfg.with_defaults()
    rec = ExperimentRecord(config=cfg.echo(), seed=cfg.seed)
    start = time.perf_counter()
    RUNNERS[cfg.experiment](cfg, rec, _Budget(cfg.budget_seconds))
    rec.wall_clock = time.perf_counter() - start
    if cfg.out:
        write_record(rec, cfg.out, cfg.format)
    return rec


def write_record(rec: ExperimentRecord, path: str, fmt: str = "json") -> None:
    if fmt == "csv":
        atomic_write(path, rec.to_csv())
        atomic_write(path + ".summary.json", json.dumps(_jsonable(rec.summary_object()), indent=2, sort_keys=True))
    else:
        atomic_write(path, rec.to_jsonl())


def rerun(record: ExperimentRecord) -> ExperimentRecord:
    """Run an experiment again from a record's config echo (without writing output)."""
    cfg = dict(record.config)
    cfg.pop("out", None)
    return run(ExperimentConfig.from_mapping(cfg))


def parse_config_file(path: str) -> dict:
    """Read a flat ``key = value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value", [line])
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out
