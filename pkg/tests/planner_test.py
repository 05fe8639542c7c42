import numpy as np
import pytest
from scipy.linalg import cho_factor
from ..lanetune._baseclasses import GENOME_LOWER, GENOME_UPPER
from ..lanetune.exceptions import InputError, NotPositiveDefiniteError
from ..lanetune.geometry import circle_curve, straight_curve
from ..lanetune.planner import (CostParams, DesiredCostParams, PlanningContext, condense,
	desired_states, expand_weights, horizon_model, plan, rollout)
from ..lanetune.tuner import decode


#==============================================================================#
#_____ Helper functions _______________________________________________________#
def curved_context(rng: np.random.Generator, N: int, u_bound: float = 0.02) -> PlanningContext:
	velocities = rng.uniform(10.0, 25.0, N)
	positions = 5.0 + np.concatenate(([0.0], np.cumsum(velocities * 0.1)))
	x0 = rng.normal(size=4) * [0.3, 0.01, 1e-3, 1e-4]
	return PlanningContext(x0, velocities, positions, circle_curve(300.0, 120.0), 0.1,
		-u_bound, u_bound)


def rollout_cost(ctx: PlanningContext, cfp: CostParams, u: np.ndarray) -> float:
	"""Planner cost of u over k = 1..N, by stepping the dynamics."""
	model = horizon_model(ctx)
	states = rollout(ctx.x0, u, model)
	Q, R = expand_weights(cfp, ctx.horizon)
	cost = 0.0
	for k in range(1, ctx.horizon + 1):
		e = states[k] - model.desired[k]
		cost += e @ Q[k] @ e
	return cost + float(np.sum(R * u ** 2))
#==============================================================================#


#==============================================================================#
class TestCostParams:

	def test_validation(self):
		with pytest.raises(InputError):
			CostParams((1.0, 1.0, 1.0, 1.0))
		with pytest.raises(InputError):
			CostParams((1.0, -1.0, 1.0, 1.0, 1.0))
		with pytest.raises(InputError):
			CostParams((1.0, 1.0, 1.0, 1.0, 1.0), 1.5)
		with pytest.raises(InputError):
			DesiredCostParams((1.0, 1.0, 1.0, 1.0, 0.0))

	def test_from_sequence(self):
		assert CostParams.from_sequence([1, 2, 3, 4, 5]).decay == 1.0
		assert CostParams.from_sequence([1, 2, 3, 4, 5, 0.9]).decay == 0.9
		with pytest.raises(InputError):
			CostParams.from_sequence([1, 2, 3])

	def test_as_cfp(self, dcfp):
		assert dcfp.as_cfp() == CostParams(dcfp.psi, 1.0)


#______________________________________________________________________________#
def test_expand_weights():
	cfp = CostParams((1.0, 2.0, 3.0, 4.0, 5.0), 0.97)
	Q, R = expand_weights(cfp, 30)
	assert Q.shape == (31, 4, 4)
	assert R.shape == (30,)
	assert np.diag(Q[0]) == pytest.approx([1.0, 2.0, 3.0, 4.0])
	assert Q[30, 0, 0] == pytest.approx(0.401, abs=1e-3)
	assert R[29] == pytest.approx(5.0 * 0.97 ** 29)
	assert np.count_nonzero(Q[5] - np.diag(np.diag(Q[5]))) == 0


#______________________________________________________________________________#
def test_desired_states_empty():
	assert desired_states(straight_curve(10.0), []).shape == (0, 4)


#==============================================================================#
class TestCondense:

	def test_rollout_oracle(self):
		rng = np.random.default_rng(0)
		for _ in range(50):
			N = int(rng.integers(1, 11))
			ctx = curved_context(rng, N)
			cfp = CostParams(tuple(10.0 ** rng.uniform(-2, 6, 5)), rng.uniform(0.5, 1.0))
			qp = condense(ctx, cfp)
			u = rng.uniform(ctx.u_min, ctx.u_max, N)
			assert 2 * qp.objective(u) + qp.offset == pytest.approx(rollout_cost(ctx, cfp, u), rel=1e-8)

	def test_prediction_matches_rollout(self):
		rng = np.random.default_rng(1)
		ctx = curved_context(rng, 8)
		model = horizon_model(ctx)
		u = rng.uniform(-0.02, 0.02, 8)
		stacked = model.F @ ctx.x0 + model.G @ u + model.W @ model.disturbances
		assert np.allclose(stacked.reshape(8, 4), rollout(ctx.x0, u, model)[1:])

	def test_zero_decay_is_singular(self):
		ctx = curved_context(np.random.default_rng(2), 5)
		with pytest.raises(NotPositiveDefiniteError):
			plan(ctx, CostParams((1.0, 1.0, 1.0, 1.0, 1.0), 0.0))

	def test_genome_box_gives_positive_definite_hessian(self):
		rng = np.random.default_rng(7)
		ctx = curved_context(rng, 30)
		for _ in range(40):
			cfp = decode(rng.uniform(GENOME_LOWER, GENOME_UPPER))
			H = condense(ctx, cfp).H
			assert np.allclose(H, H.T)
			cho_factor(H)


#==============================================================================#
class TestPlan:

	def test_equilibrium(self, cfp):
		ctx = PlanningContext(np.zeros(4), np.full(30, 20.0), 5.0 + 2.0 * np.arange(31),
			straight_curve(100.0), 0.1)
		result = plan(ctx, cfp)
		assert np.all(np.abs(result.inputs) < 1e-9)

	def test_regulation(self, dcfp):
		ctx = PlanningContext(np.array([0.5, 0.0, 0.0, 0.0]), np.full(30, 20.0),
			5.0 + 2.0 * np.arange(31), straight_curve(100.0), 0.1)
		result = plan(ctx, dcfp.as_cfp())
		assert result.inputs[0] < 0
		assert abs(result.predicted_states[-1, 0]) < 0.5
		assert np.all(np.abs(result.inputs) <= 0.02)

	def test_tight_bounds_give_free_response(self, cfp):
		ctx = curved_context(np.random.default_rng(3), 10, u_bound=1e-9)
		result = plan(ctx, cfp)
		assert np.all(np.abs(result.inputs) <= 1e-9)
		free = rollout(ctx.x0, np.zeros(10), horizon_model(ctx))
		assert np.allclose(result.predicted_states, free, atol=1e-8)

	def test_unconstrained_matches_least_squares(self, cfp):
		ctx = curved_context(np.random.default_rng(4), 30, u_bound=1e6)
		qp = condense(ctx, cfp)
		result = plan(ctx, cfp)
		expected = -np.linalg.solve(qp.H, qp.g)
		assert np.allclose(result.inputs, expected, rtol=1e-6, atol=1e-12)

	def test_scale_invariance(self, cfp):
		ctx = curved_context(np.random.default_rng(5), 30)
		base = plan(ctx, cfp).inputs
		for factor in (1e-3, 7.0, 1e4):
			assert np.allclose(plan(ctx, cfp.scaled(factor)).inputs, base, atol=1e-8)

	def test_kkt_residual(self, cfp):
		result = plan(curved_context(np.random.default_rng(6), 30), cfp)
		assert result.kkt_residual <= 1e-9


#______________________________________________________________________________#
def test_PlanningContext_validation():
	with pytest.raises(InputError):
		PlanningContext(np.zeros(4), np.full(5, 20.0), np.arange(5.0), straight_curve(100.0), 0.1)
	with pytest.raises(InputError):
		PlanningContext(np.zeros(3), np.full(5, 20.0), np.arange(6.0), straight_curve(100.0), 0.1)
