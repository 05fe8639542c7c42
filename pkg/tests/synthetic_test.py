import math
from dataclasses import replace
import numpy as np
import pytest
from ..lanetune.data import check_section
from ..lanetune.synthetic import (MAX_ACCEL, OrnsteinUhlenbeckProcess, generate_synthetic_dataset,
	speed_profile)
from .helpers import small_generator


#==============================================================================#
class TestGenerator:

	def test_zero_noise_estimates_equal_truth(self):
		dataset = generate_synthetic_dataset(small_generator(lateral_sigma=0.0, heading_sigma=0.0))
		for section in dataset:
			for est in section.estimates[::5]:
				s = est.s
				assert np.allclose(est.point(s), section.true_curve.point(s), atol=1e-9)
				assert np.allclose(est.heading(s), section.true_curve.heading(s), atol=1e-9)
				assert np.allclose(est.curvature(s), section.true_curve.curvature(s), atol=1e-12)

	def test_determinism(self):
		a = generate_synthetic_dataset(small_generator())
		b = generate_synthetic_dataset(small_generator())
		for x, y in zip(a, b):
			assert x.true_curve == y.true_curve
			assert all(e == f for e, f in zip(x.estimates, y.estimates))
			assert x.profile.equals(y.profile)

	def test_workers_do_not_change_output(self):
		a = generate_synthetic_dataset(small_generator(), workers=1)
		b = generate_synthetic_dataset(small_generator(), workers=2)
		assert [s.id for s in a] == [s.id for s in b]
		assert all(x.estimates[-1] == y.estimates[-1] for x, y in zip(a, b))

	def test_sections_are_valid(self):
		cfg = small_generator()
		dataset = generate_synthetic_dataset(cfg)
		assert len(dataset) == cfg.n_sections
		for section in dataset:
			v = section.profile['v'].to_numpy()
			assert np.all((v >= cfg.speed[0]) & (v <= cfg.speed[1]))
			check_section(section, horizon_extent=30 * cfg.speed[1] * cfg.sample_time)

	def test_lateral_error_std(self):
		cfg = small_generator(n_sections=8, lateral_sigma=0.2, heading_sigma=1e-9)
		cfg = replace(cfg, noise=replace(cfg.noise, correlation_time=0.1))
		errors = []
		for section in generate_synthetic_dataset(cfg):
			s = section.profile['s'].to_numpy()
			for j, est in enumerate(section.estimates):
				p = section.true_curve.point(s[j])
				theta = float(section.true_curve.heading(s[j]))
				q = est.point(np.clip(s[j], est.s_min, est.s_max))
				errors.append((q[1] - p[1]) * math.cos(theta) - (q[0] - p[0]) * math.sin(theta))
		assert np.std(errors) == pytest.approx(0.2, rel=0.2)


#==============================================================================#
def test_OrnsteinUhlenbeckProcess():
	rng = np.random.default_rng(0)
	process = OrnsteinUhlenbeckProcess(np.array([1.0, 2.0]), tau=1.0, Ts=0.1, rng=rng)
	samples = process.sample(200_000)
	assert samples.std(axis=0) == pytest.approx([1.0, 2.0], rel=0.05)
	lag1 = np.corrcoef(samples[:-1, 0], samples[1:, 0])[0, 1]
	assert lag1 == pytest.approx(math.exp(-0.1), abs=0.02)


#______________________________________________________________________________#
def test_speed_profile():
	times = np.arange(601) * 0.1
	v, s = speed_profile(times, (11.0, 28.0), np.random.default_rng(5))
	assert np.all((v >= 11.0) & (v <= 28.0))
	assert np.all(np.abs(np.diff(v)) / 0.1 <= MAX_ACCEL + 1e-9)
	assert s[0] == 0.0
	assert np.allclose(np.diff(s), 0.05 * (v[1:] + v[:-1]), rtol=1e-3)
