"""
Synthetic sections: roads built from straights, arcs and clothoid transitions,
smooth speed profiles, and noisy lane-centre estimates whose error evolves as
an Ornstein-Uhlenbeck process in time.
"""

import math
import numpy as np
import pandas as pd
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple
from . import logging
from .containers import GeneratorConfig, NoiseConfig, RoadConfig
from .data import Dataset, Section
from .geometry import Curve, build_curve, curve_from_curvature
from .kinematics import LateralState

#_____ GLOBALS _____#
MAX_ACCEL   = 1.0     # bound on the speed-profile acceleration, m/s^2
PERIOD      = (20.0, 60.0)
START_SLACK = 5.0     # road before the first estimate, m
END_SLACK   = 10.0    # road beyond the last estimate, m



#================================================================================#
class OrnsteinUhlenbeckProcess:

	"""
	Zero-mean vector OU process sampled exactly at a fixed step.

	Each component has stationary standard deviation `sigma[i]` and time constant
	`tau`; the state starts from the stationary distribution.
	"""

	def __init__(self, sigma: np.ndarray, tau: float, Ts: float, rng: np.random.Generator):
		self.sigma = np.asarray(sigma, dtype=float)
		self.rho   = math.exp(-Ts / tau)
		self._rng  = rng
		self.state = self.sigma * rng.standard_normal(self.sigma.shape)

	def sample(self, n: int) -> np.ndarray:
		"""(n, dim) consecutive states, the first being the current state."""
		out = np.empty((n,) + self.sigma.shape)
		innovation = self.sigma * math.sqrt(1.0 - self.rho ** 2)
		for i in range(n):
			out[i] = self.state
			self.state = self.rho * self.state + innovation * self._rng.standard_normal(self.sigma.shape)
		return out
#================================================================================#



#================================================================================#
#_____ Roads and speed profiles _________________________________________________#
def road_knots(length: float, road: RoadConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
	"""
	Piecewise-linear curvature knots: constant pieces (straights or arcs) joined
	by linear-curvature transitions.
	"""
	def draw() -> float:
		if rng.random() < road.straight_probability:
			return 0.0
		radius = road.min_radius * rng.uniform(1.0, 4.0)
		return float(rng.choice([-1.0, 1.0])) / radius

	current = draw()
	s_knots, k_knots = [0.0], [current]
	position = 0.0
	while position < length:
		position += rng.uniform(*road.segment_length)
		s_knots.append(position)
		k_knots.append(current)
		current = draw()
		position += rng.uniform(*road.transition_length)
		s_knots.append(position)
		k_knots.append(current)
	return np.array(s_knots), np.array(k_knots)


#________________________________________________________________________________#
def speed_profile(times: np.ndarray, speed: Tuple[float, float],
									rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
	"""Sinusoidal speed within `speed` and its exact distance integral."""
	low, high = speed
	mean = rng.uniform(low, high)
	period = rng.uniform(*PERIOD)
	omega = 2 * math.pi / period
	amplitude = rng.uniform(0.0, 1.0) * min(mean - low, high - mean)
	amplitude = min(amplitude, MAX_ACCEL / omega)
	phase = rng.uniform(0.0, 2 * math.pi)
	v = mean + amplitude * np.sin(omega * times + phase)
	s = mean * times - amplitude / omega * (np.cos(omega * times + phase) - math.cos(phase))
	return v, s
#================================================================================#



#================================================================================#
#_____ Estimates ________________________________________________________________#
def estimate_nodes(true_curve: Curve, dkds: np.ndarray, s_j: float, errors: np.ndarray,
									speed_at, noise: NoiseConfig) -> np.ndarray:
	"""
	Node table of the estimate at one step.

	The estimate is the true centre line pushed along its left normal by
	e(x) = a + b x + c x^2 / 2, x being the distance ahead of the vehicle.
	Heading and curvature are those of the offset curve; arc length is measured
	along it from the first node, which shares the true arc length. Nodes sit on
	the true curve's grid, one node past each end of the requested extent.
	"""
	a, b, c = errors
	grid = true_curve.s
	first = max(int(np.searchsorted(grid, s_j - noise.back_margin, side='right')) - 1, 0)
	last  = int(np.searchsorted(grid, s_j + noise.lookahead, side='left')) + 1
	s_true = grid[first:last]
	ahead = s_true - s_j

	point, theta, kappa, kappa_dot = true_curve.frames(s_true)
	dkappa = np.interp(s_true, true_curve.s, dkds)
	e   = a + b * ahead + 0.5 * c * ahead ** 2
	de  = b + c * ahead
	one = 1.0 - e * kappa
	norm2 = one ** 2 + de ** 2
	stretch = np.sqrt(norm2)

	normal = np.column_stack([-np.sin(theta), np.cos(theta)])
	xy = point + e[:, None] * normal
	s_est = s_true[0] + np.concatenate(([0.0], np.cumsum(0.5 * (stretch[1:] + stretch[:-1]) * np.diff(s_true))))
	theta_est = theta + np.arctan2(de, one)
	d_one = -(de * kappa + e * dkappa)
	kappa_est = (kappa + (one * c - de * d_one) / norm2) / stretch
	kappa_dot_est = kappa_dot + speed_at(s_true) * np.gradient(kappa_est - kappa, s_est)
	return np.column_stack([s_est, xy, theta_est, kappa_est, kappa_dot_est])


#________________________________________________________________________________#
def generate_section(index: int, cfg: GeneratorConfig,
										road_seed: np.random.SeedSequence,
										noise_seed: np.random.SeedSequence) -> Section:
	"""One synthetic section; deterministic in its seeds."""
	rng = np.random.default_rng(road_seed)
	noise, road, Ts = cfg.noise, cfg.road, cfg.sample_time

	steps = int(round(rng.uniform(*cfg.duration) / Ts))
	times = np.arange(steps + 1) * Ts
	v, travelled = speed_profile(times, cfg.speed, rng)

	s0 = noise.back_margin + START_SLACK
	profile_s = s0 + travelled
	length = profile_s[-1] + noise.lookahead + END_SLACK
	s_knots, k_knots = road_knots(length, road, rng)

	n_nodes = int(math.ceil(length / road.node_spacing)) + 1
	grid = np.linspace(0.0, length, n_nodes)
	kappa = np.interp(grid, s_knots, k_knots)
	dkds = np.gradient(kappa, grid)

	def speed_at(s):
		return np.interp(s, profile_s, v)

	true_curve = curve_from_curvature(grid, kappa, speed_at(grid) * dkds,
		theta0=rng.uniform(-math.pi, math.pi))

	noise_rng = np.random.default_rng(noise_seed)
	sigma = np.array([noise.lateral_sigma, noise.heading_sigma,
		noise.heading_sigma / noise.correlation_length])
	errors = OrnsteinUhlenbeckProcess(sigma, noise.correlation_time, Ts, noise_rng).sample(steps)
	estimates = [build_curve(estimate_nodes(true_curve, dkds, profile_s[j], errors[j], speed_at,
		noise)) for j in range(steps)]

	_, theta_0, kappa_0, kappa_dot_0 = true_curve.frames(s0)
	x0 = LateralState(0.0, float(theta_0), float(kappa_0), float(kappa_dot_0))
	profile = pd.DataFrame({'t': times, 'v': v, 's': profile_s})
	return Section(f"syn-{index:03d}", Ts, true_curve, estimates, profile, x0)


#________________________________________________________________________________#
def generate_synthetic_dataset(cfg: Optional[GeneratorConfig] = None, workers: int = 1) -> Dataset:
	"""
	Generate `cfg.n_sections` sections.

	Road and noise streams of section i are spawned from `cfg.rng_seed` and
	`cfg.noise.rng_seed`, so the output does not depend on `workers`.
	"""
	cfg = cfg or GeneratorConfig()
	road_seeds  = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.n_sections)
	noise_seeds = np.random.SeedSequence(cfg.noise.rng_seed).spawn(cfg.n_sections)
	jobs = list(zip(range(cfg.n_sections), [cfg] * cfg.n_sections, road_seeds, noise_seeds))

	sections: List[Section]
	if workers > 1:
		with ProcessPoolExecutor(max_workers=workers) as pool:
			sections = list(pool.map(generate_section, *zip(*jobs)))
	else:
		sections = [generate_section(*job) for job in jobs]

	dataset = Dataset(sections, {'source': 'synthetic', 'generator': cfg.to_dict()})
	logging.info(f"Generated synthetic dataset: {dataset.summary()}")
	return dataset
#================================================================================#
