import numpy as np
import pandas as pd
from ..lanetune.containers import GeneratorConfig, NoiseConfig
from ..lanetune.data import Section
from ..lanetune.geometry import build_curve, straight_curve
from ..lanetune.kinematics import LateralState



#================================================================================#
#_____ Helper functions _________________________________________________________#
def straight_section(steps: int = 40, v: float = 20.0, Ts: float = 0.1, bias: float = 0.0,
										heading_shift: float = 0.0, x0: LateralState = LateralState(),
										section_id: str = 'straight') -> Section:
	"""
	Section along the x axis. Every estimate is the same line shifted `bias` m
	to the left, with its headings offset by `heading_shift`.
	"""
	s0 = 10.0
	length = s0 + steps * v * Ts + 120.0
	true_curve = straight_curve(length)
	nodes = straight_curve(length, origin=(0.0, bias)).nodes.copy()
	nodes[:, 3] += heading_shift
	estimate = build_curve(nodes)
	t = np.arange(steps + 1) * Ts
	profile = pd.DataFrame({'t': t, 'v': np.full(steps + 1, v), 's': s0 + v * t})
	return Section(section_id, Ts, true_curve, [estimate] * steps, profile, x0)


def short_estimate_section(steps: int = 10, v: float = 20.0, reach: float = 20.0) -> Section:
	"""Straight section whose estimates stop `reach` m past the start position."""
	section = straight_section(steps=steps, v=v)
	estimate = straight_curve(float(section.profile['s'].iloc[0]) + reach)
	return Section('short', section.sample_time, section.true_curve, [estimate] * steps,
		section.profile, section.x0)


def small_generator(n_sections: int = 2, lateral_sigma: float = 0.15,
										heading_sigma: float = 0.004, rng_seed: int = 3) -> GeneratorConfig:
	"""A generator config producing a few short sections."""
	noise = NoiseConfig(lateral_sigma=lateral_sigma, heading_sigma=heading_sigma,
		lookahead=100.0, rng_seed=rng_seed + 1)
	return GeneratorConfig(n_sections=n_sections, duration=(3.0, 4.0), rng_seed=rng_seed, noise=noise)
#================================================================================#

