"""Uniform replay buffer with compact observation storage.

A stored observation is ~650 bytes instead of a ~37 KB float grid: the two
binary grid channels are bit-packed and the pedestrian velocity channels,
constant over the footprint, are kept as one (vx, vy) pair. Decoding
reconstructs the exact float32 grid the encoder would have seen.
"""

from __future__ import annotations

import numpy as np

from ..observation import Observation


def pack_observation(obs: Observation) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(ch0 bits, ch1 bits, ped velocity pair, flat vector)."""
    ch0 = np.packbits(obs.grid[0] > 0.5)
    ped_mask = obs.grid[1] > 0.5
    ch1 = np.packbits(ped_mask)
    if ped_mask.any():
        iy, ix = np.argwhere(ped_mask)[0]
        pvel = np.array([obs.grid[2, iy, ix], obs.grid[3, iy, ix]], dtype=np.float32)
    else:
        pvel = np.zeros(2, dtype=np.float32)
    return ch0, ch1, pvel, obs.vector.astype(np.float32)


def unpack_grids(ch0: np.ndarray, ch1: np.ndarray, pvel: np.ndarray, grid_size: int) -> np.ndarray:
    """Rebuild (B, g, g, 4) float32 channels-last grids from packed rows."""
    b = ch0.shape[0]
    g = grid_size
    c0 = np.unpackbits(ch0, axis=1)[:, : g * g].reshape(b, g, g).astype(np.float32)
    c1 = np.unpackbits(ch1, axis=1)[:, : g * g].reshape(b, g, g).astype(np.float32)
    c2 = c1 * pvel[:, 0][:, None, None]
    c3 = c1 * pvel[:, 1][:, None, None]
    return np.stack([c0, c1, c2, c3], axis=-1)


class ReplayBuffer:
    def __init__(self, capacity: int, grid_size: int, vector_dim: int):
        self.capacity = capacity
        self.grid_size = grid_size
        nbits = (grid_size * grid_size + 7) // 8
        self.ch0 = np.zeros((capacity, nbits), dtype=np.uint8)
        self.ch1 = np.zeros((capacity, nbits), dtype=np.uint8)
        self.pvel = np.zeros((capacity, 2), dtype=np.float32)
        self.vec = np.zeros((capacity, vector_dim), dtype=np.float32)
        self.n_ch0 = np.zeros((capacity, nbits), dtype=np.uint8)
        self.n_ch1 = np.zeros((capacity, nbits), dtype=np.uint8)
        self.n_pvel = np.zeros((capacity, 2), dtype=np.float32)
        self.n_vec = np.zeros((capacity, vector_dim), dtype=np.float32)
        self.code = np.zeros(capacity, dtype=np.int64)
        self.a_norm = np.zeros((capacity, 2), dtype=np.float32)
        self.reward = np.zeros(capacity, dtype=np.float32)
        self.bootstrap = np.zeros(capacity, dtype=np.float32)
        self.size = 0
        self.ptr = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs: Observation, code_index: int, a_norm: np.ndarray,
            reward: float, next_obs: Observation, bootstrap: bool) -> None:
        i = self.ptr
        self.ch0[i], self.ch1[i], self.pvel[i], self.vec[i] = pack_observation(obs)
        self.n_ch0[i], self.n_ch1[i], self.n_pvel[i], self.n_vec[i] = pack_observation(next_obs)
        self.code[i] = code_index
        self.a_norm[i] = a_norm
        self.reward[i] = reward
        self.bootstrap[i] = 1.0 if bootstrap else 0.0
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator) -> dict:
        idx = rng.integers(0, self.size, size=batch)
        return {
            "grid": unpack_grids(self.ch0[idx], self.ch1[idx], self.pvel[idx], self.grid_size),
            "vec": self.vec[idx].copy(),
            "next_grid": unpack_grids(self.n_ch0[idx], self.n_ch1[idx], self.n_pvel[idx], self.grid_size),
            "next_vec": self.n_vec[idx].copy(),
            "code": self.code[idx].copy(),
            "a_norm": self.a_norm[idx].copy(),
            "reward": self.reward[idx].copy(),
            "bootstrap": self.bootstrap[idx].copy(),
        }

    _FIELDS = ("ch0", "ch1", "pvel", "vec", "n_ch0", "n_ch1", "n_pvel", "n_vec",
               "code", "a_norm", "reward", "bootstrap")

    def state_dict(self) -> dict:
        state = {"size": np.int64(self.size), "ptr": np.int64(self.ptr)}
        for f in self._FIELDS:
            state[f] = getattr(self, f)[: self.size]
        return state

    def load_state_dict(self, state: dict) -> None:
        self.size = int(state["size"])
        self.ptr = int(state["ptr"])
        for f in self._FIELDS:
            getattr(self, f)[: self.size] = state[f]
