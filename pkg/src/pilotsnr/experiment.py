"""Monte Carlo comparison of pilot designers on a tracked fading channel.

One experiment draws ``n_trials`` independent channel trajectories and runs
every configured design method over the same trajectories with the same
per-block observation noise, so method curves differ only through the pilots
they choose. Per block the harness records the normalized estimation error
and the received SNR of the optimal beamformer; per-(method, block) means
across trials are averaged in linear scale and converted to dB afterwards.

Randomness is counter-based: every draw comes from a generator keyed by
(seed, role, trial, block), which makes runs reproducible bit-for-bit for a
fixed (seed, config) regardless of method subsets or evaluation order.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import channel, design, kalman, snr
from .design import RandomizationConfig, SolverConvergenceWarning
from .sdp import SolverConfig

logger = logging.getLogger(__name__)

# Fixed stream ids so results do not depend on method-list order.
_ROLE_INIT = 0
_ROLE_EVOLVE = 1
_ROLE_NOISE = 2
_ROLE_DESIGN = 3
_ROLE_CHECK = 9

METHOD_IDS = {
    "sdr_snr": 0,
    "mse_min": 1,
    "orthogonal": 2,
    "random": 3,
    "blockiid_snr": 4,
}

CSV_COLUMNS = (
    "method",
    "block",
    "nmse_mean",
    "snr_mean_linear",
    "snr_mean_db",
    "n_trials",
)
_GENIE_COLUMN = "genie_snr_mean_db"


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one comparison run.

    Exactly one of ``speed_kmh`` (converted through the Jakes model) and
    ``a`` (explicit per-block fading coefficient) must be given. ``rho_db``
    is the per-symbol training power over the noise floor; ``gamma_db`` the
    data-phase SNR.
    """

    n_antennas: int
    r: float
    carrier_freq_hz: float
    symbol_duration_s: float
    block_len: int
    train_len: int
    rho_db: float
    gamma_db: float
    n_blocks: int
    n_trials: int
    seed: int
    methods: tuple[str, ...]
    speed_kmh: float | None = None
    a: float | None = None
    noise_var: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    randomization: RandomizationConfig = field(default_factory=RandomizationConfig)

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        _require(self.n_antennas >= 1, "n_antennas must be >= 1")
        _require(0.0 <= self.r < 1.0, "r must lie in [0, 1)")
        _require(self.carrier_freq_hz > 0, "carrier_freq_hz must be positive")
        _require(self.symbol_duration_s > 0, "symbol_duration_s must be positive")
        _require(self.block_len >= 1, "block_len must be >= 1")
        _require(
            1 <= self.train_len <= self.block_len,
            "train_len must lie in [1, block_len]",
        )
        _require(np.isfinite(self.rho_db), "rho_db must be finite")
        _require(np.isfinite(self.gamma_db), "gamma_db must be finite")
        _require(self.n_blocks >= 1, "n_blocks must be >= 1")
        _require(self.n_trials >= 1, "n_trials must be >= 1")
        _require(self.seed >= 0, "seed must be a non-negative integer")
        _require(self.noise_var > 0, "noise_var must be positive")
        _require(
            (self.speed_kmh is None) != (self.a is None),
            "exactly one of speed_kmh and a must be set",
        )
        if self.speed_kmh is not None:
            _require(self.speed_kmh >= 0, "speed_kmh must be non-negative")
        if self.a is not None:
            _require(0.0 <= self.a <= 1.0, "a must lie in [0, 1]")
        _require(len(self.methods) >= 1, "methods must not be empty")
        _require(
            len(set(self.methods)) == len(self.methods),
            "methods must not repeat",
        )
        for m in self.methods:
            if m not in METHOD_IDS:
                raise ConfigError(
                    f"methods: unknown method {m!r}; known: "
                    + ", ".join(sorted(METHOD_IDS))
                )

    @property
    def rho(self) -> float:
        """Per-symbol training power, linear scale."""
        return self.noise_var * 10.0 ** (self.rho_db / 10.0)

    @property
    def gamma(self) -> float:
        """Data-phase SNR, linear scale."""
        return 10.0 ** (self.gamma_db / 10.0)

    @property
    def fading_coeff(self) -> float:
        """Per-block temporal correlation, from ``a`` or the Jakes model."""
        if self.a is not None:
            return self.a
        coeff = channel.jakes_coefficient(
            channel.JakesParams(
                carrier_freq_hz=self.carrier_freq_hz,
                symbol_duration_s=self.symbol_duration_s,
                block_len=self.block_len,
                speed_ms=self.speed_kmh / 3.6,
            )
        )
        if not 0.0 <= coeff <= 1.0:
            raise ConfigError(
                f"speed_kmh: Jakes coefficient {coeff:.6f} falls outside "
                "[0, 1]; set the fading coefficient a explicitly"
            )
        return coeff

    def subspace(self) -> channel.ChannelSubspace:
        """Build the channel subspace and check train_len against its rank."""
        corr = channel.build_exponential_correlation(self.n_antennas, self.r)
        sub = channel.eigen_subspace(corr, self.fading_coeff)
        if self.train_len > sub.rank:
            raise ConfigError(
                f"train_len {self.train_len} exceeds the channel rank {sub.rank}"
            )
        return sub


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


_INT_FIELDS = {
    "n_antennas",
    "block_len",
    "train_len",
    "n_blocks",
    "n_trials",
    "seed",
}
_FLOAT_FIELDS = {
    "r",
    "carrier_freq_hz",
    "symbol_duration_s",
    "rho_db",
    "gamma_db",
    "speed_kmh",
    "a",
    "noise_var",
}
_SOLVER_INT = {"max_iters"}
_RAND_INT = {"n_candidates"}


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse ``key = value`` configuration text.

    Blank lines and ``#`` comments are ignored. Sub-settings use dotted keys
    (``solver.max_iters``, ``randomization.n_candidates``); ``methods`` is a
    comma-separated list.
    """
    plain: dict[str, object] = {}
    solver_kw: dict[str, object] = {}
    rand_kw: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate config key: {key}")
        seen.add(key)
        try:
            if key == "methods":
                plain[key] = tuple(
                    tok.strip() for tok in value.split(",") if tok.strip()
                )
            elif key in _INT_FIELDS:
                plain[key] = int(value)
            elif key in _FLOAT_FIELDS:
                plain[key] = float(value)
            elif key.startswith("solver."):
                name = key.split(".", 1)[1]
                if name not in SolverConfig.__dataclass_fields__:
                    raise ConfigError(f"unknown config key: {key}")
                solver_kw[name] = int(value) if name in _SOLVER_INT else float(value)
            elif key.startswith("randomization."):
                name = key.split(".", 1)[1]
                if name not in RandomizationConfig.__dataclass_fields__:
                    raise ConfigError(f"unknown config key: {key}")
                rand_kw[name] = int(value) if name in _RAND_INT else float(value)
            else:
                raise ConfigError(f"unknown config key: {key}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{key}: invalid value {value!r}") from exc
    missing = {
        "n_antennas",
        "r",
        "carrier_freq_hz",
        "symbol_duration_s",
        "block_len",
        "train_len",
        "rho_db",
        "gamma_db",
        "n_blocks",
        "n_trials",
        "seed",
        "methods",
    } - plain.keys()
    if missing:
        raise ConfigError("missing config keys: " + ", ".join(sorted(missing)))
    if solver_kw:
        plain["solver"] = SolverConfig(**solver_kw)
    if rand_kw:
        plain["randomization"] = RandomizationConfig(**rand_kw)
    return ExperimentConfig(**plain)


def load_config(path: str) -> ExperimentConfig:
    """Read a configuration file; FileNotFoundError propagates to the CLI."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


@dataclass(frozen=True)
class CurvePoint:
    """Mean per-block statistics of one method across trials."""

    method: str
    block: int
    nmse_mean: float
    snr_mean_linear: float
    snr_mean_db: float
    n_trials: int
    genie_snr_mean_db: float | None = None

    def __post_init__(self):
        if self.method not in METHOD_IDS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.block < 0:
            raise ValueError("block must be non-negative")
        if not np.isfinite(self.nmse_mean) or self.nmse_mean < 0:
            raise ValueError("nmse_mean must be finite and non-negative")
        if not np.isfinite(self.snr_mean_linear) or self.snr_mean_linear <= 0:
            raise ValueError("snr_mean_linear must be finite and positive")
        expected_db = 10.0 * np.log10(self.snr_mean_linear)
        if abs(self.snr_mean_db - expected_db) > 1e-9 * max(1.0, abs(expected_db)):
            raise ValueError("snr_mean_db does not match snr_mean_linear")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.genie_snr_mean_db is not None and not np.isfinite(
            self.genie_snr_mean_db
        ):
            raise ValueError("genie_snr_mean_db must be finite")


def _rng(seed: int, role: int, trial: int = 0, block: int = 0) -> np.random.Generator:
    key = np.random.SeedSequence(entropy=seed, spawn_key=(role, trial, block))
    return np.random.default_rng(key)


def _design_pilot(
    method: str,
    belief: kalman.KalmanBelief,
    cfg: ExperimentConfig,
    sub: channel.ChannelSubspace,
    block: int,
    rng: np.random.Generator,
) -> design.PilotMatrix:
    # The design objectives are derived for unit training-noise power, so
    # the pilots are designed at the noise-relative budget and rescaled.
    rho, gamma, t_t = cfg.rho / cfg.noise_var, cfg.gamma, cfg.train_len
    if method == "sdr_snr":
        pilot = design.design_sdr(
            belief, gamma, rho, t_t, cfg.solver, cfg.randomization, rng
        )
    elif method == "mse_min":
        pilot = design.design_mse_min(
            belief, rho, t_t, cfg.solver, rng, cfg.randomization
        )
    elif method == "orthogonal":
        pilot = design.design_orthogonal_baseline(sub, rho, t_t, block)
    elif method == "random":
        pilot = design.design_random_baseline(sub.rank, rho, t_t, rng)
    elif method == "blockiid_snr":
        solution = design.design_block_iid(sub.eigenvalues, gamma, rho, t_t)
        pilot = design.waterfill_pilot(solution, sub.rank, rho)
    else:
        raise ConfigError(f"methods: unknown method {method!r}")
    if cfg.noise_var == 1.0:
        return pilot
    return design.PilotMatrix(
        pilot.symbols * np.sqrt(cfg.noise_var), cfg.rho * t_t
    )


def _assert_design_dominance(
    pilot: design.PilotMatrix,
    belief: kalman.KalmanBelief,
    cfg: ExperimentConfig,
    sub: channel.ChannelSubspace,
    block: int,
    trial: int,
) -> None:
    """Check the SDR pilot beats the alternatives under its design belief."""
    budget = cfg.rho / cfg.noise_var * cfg.train_len
    obj = snr.build_objective(belief, cfg.gamma, budget)
    gram = pilot.symbols @ pilot.symbols.conj().T / cfg.noise_var
    own = snr.expected_snr_analytic(obj, gram)
    tol = 1e-6 * max(1.0, abs(own))
    for other in ("mse_min", "orthogonal", "random"):
        rng = _rng(cfg.seed, _ROLE_CHECK + METHOD_IDS[other], trial, block)
        alt = _design_pilot(other, belief, cfg, sub, block, rng)
        alt_gram = alt.symbols @ alt.symbols.conj().T / cfg.noise_var
        alt_snr = snr.expected_snr_analytic(obj, alt_gram)
        if own < alt_snr - tol:
            raise RuntimeError(
                f"design-time SNR dominance violated at trial {trial} block "
                f"{block}: sdr_snr {own:.9g} < {other} {alt_snr:.9g}"
            )


def _run_trial(
    cfg: ExperimentConfig,
    sub: channel.ChannelSubspace,
    trial: int,
    include_genie: bool,
    check_dominance: bool,
):
    n_blocks = cfg.n_blocks
    states = [channel.sample_initial(sub, _rng(cfg.seed, _ROLE_INIT, trial))]
    for block in range(1, n_blocks):
        states.append(
            channel.evolve(states[-1], sub, _rng(cfg.seed, _ROLE_EVOLVE, trial, block))
        )
    n_methods = len(cfg.methods)
    nmse_vals = np.empty((n_methods, n_blocks))
    snr_vals = np.empty((n_methods, n_blocks))
    genie_vals = np.empty((n_methods, n_blocks)) if include_genie else None
    for mi, method in enumerate(cfg.methods):
        mid = METHOD_IDS[method]
        belief = kalman.initial_belief(sub)
        for block in range(n_blocks):
            rng_design = _rng(cfg.seed, _ROLE_DESIGN + mid, trial, block)
            pilot = _design_pilot(method, belief, cfg, sub, block, rng_design)
            if check_dominance and method == "sdr_snr":
                _assert_design_dominance(pilot, belief, cfg, sub, block, trial)
            obs = kalman.simulate_observation(
                states[block],
                pilot.symbols,
                cfg.noise_var,
                _rng(cfg.seed, _ROLE_NOISE, trial, block),
            )
            post = kalman.update(belief, pilot.symbols, obs)
            nmse_vals[mi, block] = kalman.nmse(states[block], post)
            snr_vals[mi, block] = snr.optimal_snr(post, cfg.gamma)
            if include_genie:
                w = snr.optimal_beamformer(post, cfg.gamma)
                wnorm = float(np.vdot(w, w).real)
                if wnorm == 0.0:
                    genie_vals[mi, block] = 0.0
                else:
                    g_true = states[block].g
                    genie_vals[mi, block] = (
                        cfg.gamma * abs(np.vdot(w, g_true)) ** 2 / wnorm
                    )
            belief = kalman.predict(post, sub)
    return nmse_vals, snr_vals, genie_vals


def run_detailed(
    cfg: ExperimentConfig,
    include_genie: bool = False,
    check_dominance: bool = False,
) -> tuple[list[CurvePoint], int]:
    """Run all trials; returns curve points and the solver-warning count.

    ``include_genie`` adds a per-block mean of the realized data SNR
    ``gamma |w^H g|^2 / ||w||^2`` with the true channel (a diagnostic upper
    reference, reported in its own column). ``check_dominance`` re-derives
    the competing designs from the SNR method's belief each block and raises
    if the SDR pilot is beaten at design time beyond solver tolerance.
    """
    sub = cfg.subspace()
    n_methods, n_blocks = len(cfg.methods), cfg.n_blocks
    nmse_sum = np.zeros((n_methods, n_blocks))
    snr_sum = np.zeros((n_methods, n_blocks))
    genie_sum = np.zeros((n_methods, n_blocks)) if include_genie else None
    n_warnings = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SolverConvergenceWarning)
        for trial in range(cfg.n_trials):
            nmse_vals, snr_vals, genie_vals = _run_trial(
                cfg, sub, trial, include_genie, check_dominance
            )
            nmse_sum += nmse_vals
            snr_sum += snr_vals
            if include_genie:
                genie_sum += genie_vals
    n_warnings = sum(
        1 for w in caught if issubclass(w.category, SolverConvergenceWarning)
    )
    for w in caught:
        if not issubclass(w.category, SolverConvergenceWarning):
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    if n_warnings:
        logger.warning(
            "%d of the design solves were not certified optimal", n_warnings
        )
    points = []
    for mi, method in enumerate(cfg.methods):
        for block in range(n_blocks):
            snr_lin = snr_sum[mi, block] / cfg.n_trials
            genie_db = None
            if include_genie:
                genie_lin = max(genie_sum[mi, block] / cfg.n_trials, 1e-300)
                genie_db = float(10.0 * np.log10(genie_lin))
            points.append(
                CurvePoint(
                    method=method,
                    block=block,
                    nmse_mean=float(nmse_sum[mi, block] / cfg.n_trials),
                    snr_mean_linear=float(snr_lin),
                    snr_mean_db=float(10.0 * np.log10(snr_lin)),
                    n_trials=cfg.n_trials,
                    genie_snr_mean_db=genie_db,
                )
            )
    points.sort(key=lambda p: (p.method, p.block))
    return points, n_warnings


def run_experiment(cfg: ExperimentConfig) -> list[CurvePoint]:
    """Monte Carlo comparison over the configured methods.

    Returns per-(method, block) mean curves sorted by (method, block).
    Solver-convergence warnings are counted and reported through the module
    logger.
    """
    points, _ = run_detailed(cfg)
    return points


def run_metadata(
    cfg: ExperimentConfig, n_solver_warnings: int | None = None
) -> list[tuple[str, str]]:
    """Deterministic key/value description embedded in CSV comments."""
    items: list[tuple[str, str]] = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        if f.name == "methods":
            items.append((f.name, ",".join(value)))
        elif f.name == "solver":
            for sf in dataclasses.fields(value):
                items.append((f"solver.{sf.name}", _fmt(getattr(value, sf.name))))
        elif f.name == "randomization":
            for rf in dataclasses.fields(value):
                items.append(
                    (f"randomization.{rf.name}", _fmt(getattr(value, rf.name)))
                )
        else:
            items.append((f.name, _fmt(value)))
    items.append(("fading_coeff", _fmt(cfg.fading_coeff)))
    items.append(("rho_linear", _fmt(cfg.rho)))
    items.append(("gamma_linear", _fmt(cfg.gamma)))
    items.append(("subspace_rank", _fmt(cfg.subspace().rank)))
    items.append(("snr_averaging", "linear mean across trials, then dB"))
    items.append(("orthogonal_baseline", "round-robin eigendirection sweep"))
    if n_solver_warnings is not None:
        items.append(("n_solver_warnings", _fmt(n_solver_warnings)))
    return items


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def emit_csv(
    points: list[CurvePoint],
    path: str,
    metadata: list[tuple[str, str]] | None = None,
) -> None:
    """Write curve points as CSV with optional ``#`` metadata comments.

    Floats carry 10 significant digits; rows are sorted by (method, block);
    newlines are LF on every platform. An empty point list produces a
    header-only file.
    """
    has_genie = [p.genie_snr_mean_db is not None for p in points]
    if any(has_genie) and not all(has_genie):
        raise ValueError("genie column must be present on all points or none")
    genie = bool(points) and all(has_genie)
    columns = CSV_COLUMNS + ((_GENIE_COLUMN,) if genie else ())
    rows = sorted(points, key=lambda p: (p.method, p.block))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, value in metadata or []:
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(columns) + "\n")
        for p in rows:
            cells = [
                p.method,
                str(p.block),
                f"{p.nmse_mean:.10g}",
                f"{p.snr_mean_linear:.10g}",
                f"{p.snr_mean_db:.10g}",
                str(p.n_trials),
            ]
            if genie:
                cells.append(f"{p.genie_snr_mean_db:.10g}")
            fh.write(",".join(cells) + "\n")


def parse_csv(path: str) -> tuple[list[CurvePoint], dict[str, str]]:
    """Read back an emitted CSV; returns points and metadata comments."""
    metadata: dict[str, str] = {}
    points: list[CurvePoint] = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            stripped = line.lstrip("#").strip()
            if "=" in stripped:
                key, value = (part.strip() for part in stripped.split("=", 1))
                metadata[key] = value
            continue
        if line.strip():
            body.append(line)
    if not body:
        raise ValueError("CSV has no header line")
    header = tuple(body[0].split(","))
    if header not in (CSV_COLUMNS, CSV_COLUMNS + (_GENIE_COLUMN,)):
        raise ValueError(f"unexpected CSV header: {body[0]!r}")
    genie = len(header) == len(CSV_COLUMNS) + 1
    for line in body[1:]:
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"malformed CSV row: {line!r}")
        points.append(
            CurvePoint(
                method=cells[0],
                block=int(cells[1]),
                nmse_mean=float(cells[2]),
                snr_mean_linear=float(cells[3]),
                snr_mean_db=float(cells[4]),
                n_trials=int(cells[5]),
                genie_snr_mean_db=float(cells[6]) if genie else None,
            )
        )
    return points, metadata
