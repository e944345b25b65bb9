"""The training driver: environment interaction interleaved with updates.

Episodes run to completion; the step budget is honored at the first episode
boundary at or past it, which keeps checkpoints at episode boundaries and
makes resume bit-exact: everything the continuation depends on (parameters,
optimizer moments, replay contents, rng states, counters) is persisted.

Produces three artifacts in the output directory:

* ``checkpoint.npz``      policy/critic parameters, targets, temperatures
* ``trainer_state.npz``   optimizer moments and the replay buffer
* ``sidecar.json``        step counters and rng states
* ``curve.jsonl``         one evaluation record per checkpoint interval
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from ..episode import EpisodeRunner, EpisodeSettings
from ..nn.checkpoint import load_arrays, save_arrays
from ..rollout import episode_seed, policy_act_fn, run_eval
from ..world import V_MAX, W_MAX, TerminalKind
from .model import ModelSpec
from .policy import HybridAction, Policy, TrainingDivergence, action_codes, normalized_from_command
from .trainer import HsacConfig, Trainer

_EP_STREAM = 7


@dataclass
class TrainSettings:
    total_steps: int = 30_000
    eval_interval: int = 2_000
    eval_episodes: int = 20
    seed: int = 0
    eval_seed: int = 10_000


def _random_hybrid(rng: np.random.Generator, codes) -> HybridAction:
    idx = int(rng.integers(len(codes)))
    v = float(rng.uniform(0.0, V_MAX))
    w = float(rng.uniform(-W_MAX, W_MAX))
    u = normalized_from_command(v, w)
    xi = np.arctanh(np.clip(u, -0.999999, 0.999999))
    return HybridAction(codes[idx], idx, v, w, xi, 0.0)


def _rng_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def _restore_rng(state: dict) -> np.random.Generator:
    gen = np.random.Generator(np.random.PCG64())
    gen.bit_generator.state = state
    return gen


class TrainingRun:
    def __init__(self, episode_settings: EpisodeSettings, model_spec: ModelSpec,
                 hsac: HsacConfig, train: TrainSettings, out_dir: str):
        self.ep_settings = episode_settings
        self.spec = model_spec
        self.hsac = hsac
        self.ts = train
        self.out_dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.trainer = Trainer(model_spec, hsac, train.seed)
        self.codes = action_codes(model_spec.n_codes)
        self.policy = Policy(self.trainer.model, self.trainer.params, model_spec.n_codes)
        self.rng_policy = np.random.Generator(np.random.PCG64(np.random.SeedSequence((train.seed, 3))))
        self.rng_buffer = np.random.Generator(np.random.PCG64(np.random.SeedSequence((train.seed, 2))))
        self.step = 0
        self.episode_index = 0
        self.curve_path = os.path.join(out_dir, "curve.jsonl")
        self._curve_fh = None
        self._curve_mode = "w"
        self._next_eval = train.eval_interval
        self._last_metrics = None
        self._t_start = time.time()
        self._prior_hours = 0.0

    # -- persistence ---------------------------------------------------------

    def save(self) -> None:
        self.trainer.save_checkpoint(os.path.join(self.out_dir, "checkpoint.npz"))
        state = self.trainer.opt_state()
        state.update({f"buffer.{k}": v for k, v in self.trainer.buffer.state_dict().items()})
        save_arrays(os.path.join(self.out_dir, "trainer_state.npz"), state)
        sidecar = {
            "step": self.step,
            "episode_index": self.episode_index,
            "next_eval": self._next_eval,
            "elapsed_hours": self._prior_hours + (time.time() - self._t_start) / 3600.0,
            "rng_policy": _rng_state(self.rng_policy),
            "rng_buffer": _rng_state(self.rng_buffer),
            "rng_update": _rng_state(self.trainer.rng_update),
        }
        with open(os.path.join(self.out_dir, "sidecar.json"), "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=1, default=int)

    def resume(self) -> None:
        arrays = load_arrays(os.path.join(self.out_dir, "checkpoint.npz"))
        self.trainer.load_checkpoint_arrays(arrays)
        state = load_arrays(os.path.join(self.out_dir, "trainer_state.npz"))
        self.trainer.load_opt_state({k: v for k, v in state.items() if k.startswith("opt.") or k == "update_count"})
        self.trainer.buffer.load_state_dict({k[len("buffer."):]: v for k, v in state.items() if k.startswith("buffer.")})
        with open(os.path.join(self.out_dir, "sidecar.json"), "r", encoding="utf-8") as fh:
            sidecar = json.load(fh)
        self.step = sidecar["step"]
        self.episode_index = sidecar["episode_index"]
        self._next_eval = sidecar["next_eval"]
        self._prior_hours = sidecar.get("elapsed_hours", 0.0)
        self._curve_mode = "a"
        self.rng_policy = _restore_rng(sidecar["rng_policy"])
        self.rng_buffer = _restore_rng(sidecar["rng_buffer"])
        self.trainer.rng_update = _restore_rng(sidecar["rng_update"])

    # -- evaluation checkpoints ------------------------------------------------

    def _curve_record(self) -> None:
        report, _ = run_eval(
            self.ep_settings,
            policy_act_fn(self.policy),
            self.ts.eval_episodes,
            episode_seed(self.ts.eval_seed, 1, self._next_eval),
        )
        m = self._last_metrics
        record = {
            "step": self.step,
            "episodes": self.episode_index,
            "success": report.success,
            "collision": report.collision,
            "timeout": report.timeout,
            "return_mean": report.return_mean,
            "critic_loss": None if m is None else m.critic_loss,
            "actor_loss": None if m is None else m.actor_loss,
            "alpha_d": None if m is None else m.alpha_d,
            "alpha_c": None if m is None else m.alpha_c,
            "entropy_d": None if m is None else m.entropy_d,
            "entropy_c": None if m is None else m.entropy_c,
            "q_mean": None if m is None else m.q_mean,
        }
        if self._curve_fh is None:
            self._curve_fh = open(self.curve_path, self._curve_mode, encoding="utf-8")
        self._curve_fh.write(json.dumps(record) + "\n")
        self._curve_fh.flush()

    # -- main loop ----------------------------------------------------------------

    def run(self) -> None:
        try:
            while self.step < self.ts.total_steps:
                self._run_episode()
                while self._next_eval <= self.step:
                    self._curve_record()
                    self._next_eval += self.ts.eval_interval
        except TrainingDivergence:
            diag = os.path.join(self.out_dir, "diagnostic")
            os.makedirs(diag, exist_ok=True)
            self.trainer.save_checkpoint(os.path.join(diag, "checkpoint.npz"))
            raise
        finally:
            if self._curve_fh is not None:
                self._curve_fh.close()
                self._curve_fh = None
        self.save()

    def _run_episode(self) -> None:
        runner = EpisodeRunner(self.ep_settings, episode_seed(self.ts.seed, _EP_STREAM, self.episode_index))
        obs = runner.observation()
        while runner.terminal == TerminalKind.RUNNING:
            if self.step < self.hsac.warmup_steps:
                action = _random_hybrid(self.rng_policy, self.codes)
            else:
                action = self.policy.act(obs, mode="stochastic", rng=self.rng_policy)
            result = runner.step(action.code, action.v, action.w)
            bootstrap = result.terminal in (TerminalKind.RUNNING, TerminalKind.TIMEOUT)
            self.trainer.buffer.add(
                obs,
                action.code_index,
                normalized_from_command(action.v, action.w).astype(np.float32),
                result.reward.total,
                result.observation,
                bootstrap,
            )
            obs = result.observation
            self.step += 1
            ready = self.step >= self.hsac.warmup_steps and len(self.trainer.buffer) >= self.hsac.batch_size
            if ready:
                for _ in range(self.hsac.updates_per_step):
                    self._last_metrics = self.trainer.update(self.rng_buffer)
        self.episode_index += 1

    @property
    def elapsed_hours(self) -> float:
        return self._prior_hours + (time.time() - self._t_start) / 3600.0
