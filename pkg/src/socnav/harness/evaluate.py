"""Checkpoint evaluation: deterministic sweeps, metrics files, episode logs."""

from __future__ import annotations

import csv
import json
import os

from ..hsac import HsacModel, Policy, load_policy_params
from ..rewards import MetricsReport, aggregate_metrics
from ..rollout import episode_seed, policy_act_fn, rollout_episode
from .logs import append_episode


class IncompatibleCheckpoint(RuntimeError):
    pass


def method_label(cfg) -> str:
    return f"hsac-{cfg.action_codes}d-{'lang' if cfg.language else 'nolang'}"


def load_policy(checkpoint_path: str, expected_codes: int | None = None) -> Policy:
    spec, params = load_policy_params(checkpoint_path)
    if expected_codes is not None and spec.n_codes != expected_codes:
        raise IncompatibleCheckpoint(
            f"checkpoint has a {spec.n_codes}-code head but the config selects {expected_codes}"
        )
    return Policy(HsacModel(spec), params, spec.n_codes)


def training_time_from_sidecar(checkpoint_path: str) -> float | None:
    sidecar = os.path.join(os.path.dirname(checkpoint_path), "sidecar.json")
    if not os.path.exists(sidecar):
        return None
    with open(sidecar, "r", encoding="utf-8") as fh:
        return json.load(fh).get("elapsed_hours")


def evaluate_checkpoint(cfg, checkpoint_path: str, episodes: int, out_dir: str,
                        write_logs: bool = True) -> MetricsReport:
    """Run the deterministic evaluation sweep and write metrics + logs."""
    os.makedirs(out_dir, exist_ok=True)
    policy = load_policy(checkpoint_path, cfg.action_codes)
    settings = cfg.episode_settings()
    act = policy_act_fn(policy)
    outcomes = []
    log_fh = open(os.path.join(out_dir, "episodes.jsonl"), "w", encoding="utf-8") if write_logs else None
    try:
        for i in range(episodes):
            seed = episode_seed(cfg.eval_seed, 0, i)
            outcome, records = rollout_episode(settings, seed, act)
            outcomes.append(outcome)
            if log_fh is not None:
                append_episode(log_fh, i, seed, cfg.scene, records, outcome)
    finally:
        if log_fh is not None:
            log_fh.close()
    report = aggregate_metrics(outcomes, training_time_from_sidecar(checkpoint_path))
    write_metrics(report, cfg, out_dir)
    return report


_CSV_COLUMNS = ["scene", "method", "episodes", "success", "success_std", "collision",
                "timeout", "step_mean", "human_collisions", "mdh", "csc",
                "return_mean", "training_time_hours"]


def write_metrics(report: MetricsReport, cfg, out_dir: str) -> None:
    payload = {"scene": cfg.scene, "method": method_label(cfg), **report.to_dict()}
    with open(os.path.join(out_dir, "metrics.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    with open(os.path.join(out_dir, "metrics.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerow({k: payload.get(k) for k in _CSV_COLUMNS})


def combine_reports(metric_files: list[str], out_csv: str) -> list[dict]:
    """Side-by-side table over several metrics.json files (ablation reports)."""
    rows = []
    for path in metric_files:
        with open(path, "r", encoding="utf-8") as fh:
            rows.append(json.load(fh))
    with open(out_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in _CSV_COLUMNS})
    return rows
