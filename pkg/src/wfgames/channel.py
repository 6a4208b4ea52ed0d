"""Frequency-selective Gaussian interference channels.

A channel instance holds squared link gains ``|H_jk^f|^2`` for every
transmitter j, receiver k and frequency bin f, together with per-receiver
noise powers.  Everything downstream of this module works on the normalized
form: per-user noise-to-direct-gain ratios and cross-gain ratios.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SamplingError",
    "RayleighProfile",
    "ChannelTopology",
    "ChannelRealization",
    "NormalizedChannel",
    "normalize",
    "spectral_norms",
    "is_diagonally_dominant",
    "generate_channel",
    "sample_admissible_channel",
]


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its attempt budget."""


@dataclass(frozen=True)
class RayleighProfile:
    """Multi-ray Rayleigh fading profile with exponentially decaying ray power.

    Ray m sits at delay d_m = m * ray_spacing and carries a circularly
    symmetric complex Gaussian tap whose variance is proportional to
    exp(-d_m / decay_constant).  Tap variances are scaled so that they sum
    to the link's total power, hence E|H^f|^2 equals that total power in
    every bin (normalization holds in expectation, not per realization).
    """

    num_rays: int = 4
    ray_spacing: float = 160e-9
    bandwidth: float = 6.25e6
    decay_constant: float | None = None

    def __post_init__(self):
        if self.num_rays < 1:
            raise ValueError("num_rays must be at least 1")
        if self.ray_spacing <= 0 or self.bandwidth <= 0:
            raise ValueError("ray_spacing and bandwidth must be positive")
        if self.decay_constant is None:
            object.__setattr__(self, "decay_constant", self.ray_spacing)
        elif self.decay_constant <= 0:
            raise ValueError("decay_constant must be positive")

    def ray_delays(self) -> np.ndarray:
        return np.arange(self.num_rays) * self.ray_spacing

    def ray_variances(self, total_power: float) -> np.ndarray:
        """Tap variances, scaled so their sum equals total_power."""
        weights = np.exp(-self.ray_delays() / self.decay_constant)
        return total_power * weights / weights.sum()

    def to_dict(self) -> dict:
        return {
            "num_rays": self.num_rays,
            "ray_spacing": self.ray_spacing,
            "bandwidth": self.bandwidth,
            "decay_constant": self.decay_constant,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RayleighProfile":
        return cls(**d)


@dataclass(frozen=True)
class ChannelTopology:
    """Who talks over what: user/bin counts, per-link total powers, noise.

    link_power[j, k] is the total multipath power of the j -> k link;
    noise is the flat per-bin noise power at every receiver.
    """

    num_users: int
    num_bins: int
    link_power: np.ndarray
    noise: float = 0.01

    def __post_init__(self):
        lp = np.asarray(self.link_power, dtype=float)
        if lp.shape != (self.num_users, self.num_users):
            raise ValueError("link_power must be (num_users, num_users)")
        if np.any(lp < 0) or np.any(np.diag(lp) <= 0):
            raise ValueError("link powers must be >= 0 with positive diagonal")
        if self.num_bins < 1 or self.num_users < 1:
            raise ValueError("need at least one user and one bin")
        if self.noise <= 0:
            raise ValueError("noise must be positive")
        object.__setattr__(self, "link_power", lp)

    @classmethod
    def symmetric(cls, num_users, num_bins, cross_power=0.5, direct_power=1.0,
                  noise=0.01) -> "ChannelTopology":
        """All direct links at direct_power, all cross links at cross_power."""
        lp = np.full((num_users, num_users), float(cross_power))
        np.fill_diagonal(lp, float(direct_power))
        return cls(num_users, num_bins, lp, noise)


class ChannelRealization:
    """Squared link gains and noise for one channel draw.

    gain has shape (K, K, N) with gain[j, k, f] = |H_jk^f|^2 and noise has
    shape (K, N).  Direct gains and noise must be strictly positive; arrays
    are copied and frozen at construction.
    """

    def __init__(self, gain, noise):
        gain = np.array(gain, dtype=np.float64)
        noise = np.array(noise, dtype=np.float64)
        if gain.ndim != 3 or gain.shape[0] != gain.shape[1]:
            raise ValueError("gain must have shape (K, K, N)")
        k, _, n = gain.shape
        if noise.shape != (k, n):
            raise ValueError("noise must have shape (K, N)")
        if not np.all(np.isfinite(gain)) or not np.all(np.isfinite(noise)):
            raise ValueError("gains and noise must be finite")
        if np.any(gain < 0):
            raise ValueError("squared gains must be nonnegative")
        diag = gain[np.arange(k), np.arange(k), :]
        if np.any(diag <= 0):
            raise ValueError("direct gains must be strictly positive")
        if np.any(noise <= 0):
            raise ValueError("noise must be strictly positive")
        gain.flags.writeable = False
        noise.flags.writeable = False
        self.gain = gain
        self.noise = noise

    @property
    def num_users(self) -> int:
        return self.gain.shape[0]

    @property
    def num_bins(self) -> int:
        return self.gain.shape[2]

    def to_dict(self) -> dict:
        return {
            "num_users": self.num_users,
            "num_bins": self.num_bins,
            "gain": self.gain.tolist(),
            "noise": self.noise.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelRealization":
        for key in ("num_users", "num_bins", "gain", "noise"):
            if key not in d:
                raise ValueError(f"channel document missing field '{key}'")
        gain = np.asarray(d["gain"], dtype=np.float64)
        noise = np.asarray(d["noise"], dtype=np.float64)
        k, n = int(d["num_users"]), int(d["num_bins"])
        if gain.shape != (k, k, n):
            raise ValueError(
                f"field 'gain' has shape {gain.shape}, expected {(k, k, n)}")
        if noise.shape != (k, n):
            raise ValueError(
                f"field 'noise' has shape {noise.shape}, expected {(k, n)}")
        return cls(gain, noise)

    @classmethod
    def from_json(cls, text: str) -> "ChannelRealization":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class NormalizedChannel:
    """Per-user view of the channel after dividing by direct gains.

    noise_norm[k, f] = sigma_k^f / |H_kk^f|^2 and, for j != k,
    cross[j, k, f] = |H_jk^f|^2 / |H_kk^f|^2; the diagonal of cross is zero.
    User k's rate depends on the channel only through these ratios.
    """

    noise_norm: np.ndarray
    cross: np.ndarray

    @property
    def num_users(self) -> int:
        return self.noise_norm.shape[0]

    @property
    def num_bins(self) -> int:
        return self.noise_norm.shape[1]


def normalize(ch: ChannelRealization) -> NormalizedChannel:
    k = ch.num_users
    diag = ch.gain[np.arange(k), np.arange(k), :]
    noise_norm = ch.noise / diag
    cross = ch.gain / diag[np.newaxis, :, :]
    cross = cross.copy()
    cross[np.arange(k), np.arange(k), :] = 0.0
    noise_norm.flags.writeable = False
    cross.flags.writeable = False
    return NormalizedChannel(noise_norm=noise_norm, cross=cross)


def spectral_norms(nc: NormalizedChannel) -> np.ndarray:
    """Largest singular value of the hollow cross-gain matrix, per bin."""
    mats = np.moveaxis(nc.cross, 2, 0)
    return np.linalg.svd(mats, compute_uv=False)[:, 0]


def is_diagonally_dominant(nc: NormalizedChannel) -> bool:
    """True when every bin's cross-gain matrix has spectral norm below one.

    This is the admissibility condition under which the full game and any
    follower sub-game have a unique Nash equilibrium reachable by iterated
    water-filling.
    """
    return bool(np.all(spectral_norms(nc) < 1.0))


def _entropy_tuple(rng_seed) -> tuple:
    if isinstance(rng_seed, (int, np.integer)):
        return (int(rng_seed),)
    return tuple(int(s) for s in rng_seed)


def generate_channel(profile: RayleighProfile, topology: ChannelTopology,
                     rng_seed) -> ChannelRealization:
    """Draw one multipath realization of every link.

    Each link (j, k) uses its own RNG stream derived from
    (rng_seed..., j, k), so the result does not depend on the order in
    which links are drawn and single links can be reproduced in isolation.
    rng_seed may be an int or a tuple of ints.
    """
    k_users, n_bins = topology.num_users, topology.num_bins
    base = _entropy_tuple(rng_seed)
    delays = profile.ray_delays()
    freqs = np.arange(n_bins) / n_bins * profile.bandwidth
    # (N, R) response of a unit tap at each delay
    steering = np.exp(-2j * np.pi * freqs[:, None] * delays[None, :])
    gain = np.empty((k_users, k_users, n_bins))
    for j in range(k_users):
        for k in range(k_users):
            total = topology.link_power[j, k]
            if total == 0.0:
                gain[j, k, :] = 0.0
                continue
            rng = np.random.default_rng(np.random.SeedSequence(base + (j, k)))
            std = np.sqrt(profile.ray_variances(total) / 2.0)
            taps = (rng.standard_normal(profile.num_rays)
                    + 1j * rng.standard_normal(profile.num_rays)) * std
            h = steering @ taps
            gain[j, k, :] = np.abs(h) ** 2
    noise = np.full((k_users, n_bins), topology.noise)
    return ChannelRealization(gain, noise)


def sample_admissible_channel(profile: RayleighProfile,
                              topology: ChannelTopology, rng_seed,
                              max_rejections: int = 10_000):
    """Rejection-sample a channel draw satisfying diagonal dominance.

    Returns (channel, rejections) for the first admissible draw.  Attempt i
    extends the seed entropy with i, so the sequence of candidate draws is
    deterministic in rng_seed.  Raises SamplingError after max_rejections
    failed attempts (the profile is then presumed inadmissible).
    """
    base = _entropy_tuple(rng_seed)
    for attempt in range(max_rejections + 1):
        ch = generate_channel(profile, topology, base + (attempt,))
        if is_diagonally_dominant(normalize(ch)):
            return ch, attempt
    raise SamplingError(
        f"no admissible channel in {max_rejections + 1} attempts "
        f"(cross links too strong for diagonal dominance?)")
