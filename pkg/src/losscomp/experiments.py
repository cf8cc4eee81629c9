"""Seeded experiment harness: figure tables as CSV, nothing interactive.

Each run is fully determined by an :class:`ExperimentConfig`.  The RNG
splitting rule is ``default_rng(SeedSequence((master_seed, eta_index,
trial)))`` per (efficiency, trial) cell, so cells are independent and
any execution order gives identical output.  Tables carry a 12-hex-digit
hash of the canonical config serialization in every row; reruns with the
same config are byte-identical.

Outputs per run: a mean table (one row per (eta, truncation index),
averaged over trials) and a sibling ``*_trials.csv`` with the per-trial
rows that the averages came from.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .compensation import convergence_scan, error_vs_eta, measure_ray
from .direct_detection import sample_counts
from .fock_core import StateSpec
from .homodyne import sample_quadratures
from .loss_channel import apply_loss

DEFAULT_MASTER_SEED = 235711

# sanity ceiling on N * max(j_M): kernel evaluations dominate runtime and
# the default runs sit two orders of magnitude below this
_BUDGET = 5 * 10**7


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat, text-serializable description of one experiment run."""

    state_kind: str = "thermal"
    state_nbar: float = 2.0
    state_alpha: complex = 1.0 + 0.0j
    state_m: int = 0
    dim: int = 64
    target_n: int = 2
    target_d: int = 0
    detection: str = "homodyne"
    eta_list: tuple = (0.6, 0.55, 0.53, 0.5)
    n_samples: int = 24000
    jm_list: tuple | None = None  # None -> per-eta default grid
    trials: int = 10
    master_seed: int = DEFAULT_MASTER_SEED
    output_path: str = "fig1.csv"

    def state(self) -> StateSpec:
        if self.state_kind == "thermal":
            return StateSpec(kind="thermal", dim=self.dim, nbar=self.state_nbar)
        if self.state_kind == "coherent":
            return StateSpec(kind="coherent", dim=self.dim, alpha=self.state_alpha)
        if self.state_kind == "fock":
            return StateSpec(kind="fock", dim=self.dim, m=self.state_m)
        raise ValueError(f"unknown state kind {self.state_kind!r}")

    def validate(self) -> None:
        if self.detection not in ("homodyne", "direct"):
            raise ValueError(f"unknown detection mode {self.detection!r}")
        if not self.eta_list:
            raise ValueError("eta_list must be non-empty")
        for eta in self.eta_list:
            if not 0.0 < eta <= 1.0:
                raise ValueError(f"efficiency {eta} outside (0, 1]")
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.target_n < 0 or self.target_d < 0:
            raise ValueError("target indices must be nonnegative")
        j_top = max(max(self.truncation_grid(eta)) for eta in self.eta_list)
        if self.n_samples * j_top > _BUDGET:
            raise ValueError(
                f"n_samples * max(j_M) = {self.n_samples * j_top} exceeds the "
                f"compute budget {_BUDGET}")
        if self.detection == "direct":
            if self.target_d != 0:
                raise ValueError("direct detection only measures diagonal elements")
            if self.target_n + j_top >= self.dim:
                raise ValueError("truncation grid reaches beyond the state dimension")
        self.state().build()  # surfaces bad state parameters early

    def truncation_grid(self, eta: float) -> list:
        """j_M grid for one efficiency: explicit list, or the default.

        The default homodyne grid is 1..20, extended by 25..100 in steps
        of 5 when eta <= 0.53 — the spaced tail is what lets the scan
        verdict separate a slowly-settling error from one still growing
        like a power of j_M.  Direct detection defaults to 1..40.
        """
        if self.jm_list is not None:
            return list(self.jm_list)
        if self.detection == "direct":
            return list(range(1, 41))
        grid = list(range(1, 21))
        if eta <= 0.53 + 1e-12:
            grid += list(range(25, 101, 5))
        return grid


_CONFIG_FIELDS = (
    "state_kind", "state_nbar", "state_alpha", "state_m", "dim",
    "target_n", "target_d", "detection", "eta_list", "n_samples",
    "jm_list", "trials", "master_seed", "output_path",
)


def _format_value(name, value):
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ",".join(_format_value(name, v) for v in value)
    if isinstance(value, complex):
        return f"{value.real:.9g}{value.imag:+.9g}j"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical flat ``key = value`` text; the hash is taken over this."""
    lines = [f"{name} = {_format_value(name, getattr(config, name))}"
             for name in _CONFIG_FIELDS]
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()[:12]


def _parse_value(name, text):
    text = text.strip()
    if name in ("state_kind", "detection", "output_path"):
        return text
    if name in ("state_m", "dim", "target_n", "target_d", "n_samples",
                "trials", "master_seed"):
        return int(text)
    if name in ("state_nbar",):
        return float(text)
    if name == "state_alpha":
        return complex(text)
    if name == "eta_list":
        return tuple(float(v) for v in text.split(","))
    if name == "jm_list":
        if text == "auto":
            return None
        return tuple(int(v) for v in text.split(","))
    raise ValueError(f"unknown config key {name!r}")


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read flat ``key = value`` lines over a base config (``#`` comments ok)."""
    config = base if base is not None else ExperimentConfig()
    updates = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in _CONFIG_FIELDS:
            raise ValueError(f"config line {lineno}: unknown key {name!r}")
        updates[name] = _parse_value(name, value)
    return replace(config, **updates)


def default_config(figure: str) -> ExperimentConfig:
    """Built-in defaults for ``fig1``, ``fig2``, and ``direct`` runs."""
    if figure == "fig1":
        return ExperimentConfig()
    if figure == "fig2":
        return ExperimentConfig(
            eta_list=tuple(round(0.4 + 0.025 * k, 3) for k in range(21)),
            n_samples=8000, jm_list=(10, 20, 100), output_path="fig2.csv")
    if figure == "direct":
        return ExperimentConfig(
            detection="direct", eta_list=(0.45, 0.42), output_path="direct.csv")
    raise ValueError(f"unknown figure {figure!r}")


def _trial_rng(config, eta_index, trial):
    seq = np.random.SeedSequence((config.master_seed, eta_index, trial))
    return np.random.default_rng(seq)


def _measurement_source(config, damped, rng):
    if config.detection == "direct":
        return sample_counts(damped, config.n_samples, rng)
    return sample_quadratures(damped, config.n_samples, rng)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return f"{float(value):.9g}"


def _trials_path(path: Path) -> Path:
    return path.with_name(path.stem + "_trials" + path.suffix)


def run_scan_table(config: ExperimentConfig, out=None):
    """Shared engine behind ``run_fig1`` and ``run_direct_contrast``.

    Emits the mean table ``eta,j_M,value,propagated_error,
    empirical_error,theory,config_hash`` plus per-trial rows (with the
    per-trial scan verdict) in the sibling file.  CSV cells hold real
    parts; off-diagonal targets keep their full complex values in the
    library API only.
    """
    config.validate()
    chash = config_hash(config)
    signal = config.state().build()
    n, d = config.target_n, config.target_d
    theory = signal.element(n, n + d).real
    mean_rows, trial_rows = [], []
    for eta_index, eta in enumerate(config.eta_list):
        jm_grid = config.truncation_grid(eta)
        damped = apply_loss(signal, eta)
        values = np.empty((config.trials, len(jm_grid)))
        errors = np.empty_like(values)
        for trial in range(config.trials):
            rng = _trial_rng(config, eta_index, trial)
            source = _measurement_source(config, damped, rng)
            result = convergence_scan(source, n, d, eta, jm_grid)
            for k, (jm, value, error) in enumerate(result.trace):
                values[trial, k] = value.real
                errors[trial, k] = error
                trial_rows.append([
                    _fmt(eta), _fmt(trial), _fmt(jm), _fmt(value.real),
                    _fmt(error), result.verdict, chash])
        spread = (np.std(values, axis=0, ddof=1) if config.trials > 1
                  else np.full(len(jm_grid), np.nan))
        for k, jm in enumerate(jm_grid):
            mean_rows.append([
                _fmt(eta), _fmt(jm), _fmt(values[:, k].mean()),
                _fmt(errors[:, k].mean()), _fmt(spread[k]), _fmt(theory), chash])
    out_path = Path(out) if out is not None else Path(config.output_path)
    _write_csv(out_path, ["eta", "j_M", "value", "propagated_error",
                          "empirical_error", "theory", "config_hash"], mean_rows)
    _write_csv(_trials_path(out_path),
               ["eta", "trial", "j_M", "value", "propagated_error",
                "verdict", "config_hash"], trial_rows)
    return out_path, _trials_path(out_path)


def run_fig1(config: ExperimentConfig | None = None, out=None):
    """Compensated element versus truncation index, around the transition."""
    return run_scan_table(config if config is not None else default_config("fig1"),
                          out=out)


def run_direct_contrast(config: ExperimentConfig | None = None, out=None):
    """Same table for photocounting at efficiencies below the transition."""
    return run_scan_table(config if config is not None else default_config("direct"),
                          out=out)


def run_fig2(config: ExperimentConfig | None = None, out=None):
    """Normalized error versus efficiency for several truncation indices.

    Mean table ``eta,j_M,propagated_error,config_hash``; one fresh
    dataset per (eta, trial) cell, averaged over trials.
    """
    config = config if config is not None else default_config("fig2")
    config.validate()
    chash = config_hash(config)
    signal = config.state().build()
    n, d = config.target_n, config.target_d
    jm_grid = config.truncation_grid(config.eta_list[0])
    j_top = max(jm_grid)
    mean_rows, trial_rows = [], []
    for eta_index, eta in enumerate(config.eta_list):
        per_trial = np.empty((config.trials, len(jm_grid)))
        for trial in range(config.trials):
            rng = _trial_rng(config, eta_index, trial)
            source = _measurement_source(config, damped=apply_loss(signal, eta),
                                         rng=rng)
            coeffs = measure_ray(source, n, d, j_top)
            rows = error_vs_eta(coeffs, n, d, [eta], jm_grid)
            for k, (_, jm, error) in enumerate(rows):
                per_trial[trial, k] = error
                trial_rows.append(
                    [_fmt(eta), _fmt(trial), _fmt(jm), _fmt(error), chash])
        for k, jm in enumerate(jm_grid):
            mean_rows.append(
                [_fmt(eta), _fmt(jm), _fmt(per_trial[:, k].mean()), chash])
    out_path = Path(out) if out is not None else Path(config.output_path)
    _write_csv(out_path, ["eta", "j_M", "propagated_error", "config_hash"],
               mean_rows)
    _write_csv(_trials_path(out_path),
               ["eta", "trial", "j_M", "propagated_error", "config_hash"],
               trial_rows)
    return out_path, _trials_path(out_path)
