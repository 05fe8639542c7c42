import math
from dataclasses import replace
import numpy as np
import pytest
from ..lanetune.containers import SimulationConfig
from ..lanetune.exceptions import SimulationError
from ..lanetune.kinematics import LateralState
from ..lanetune.planner import DesiredCostParams
from ..lanetune.simulator import (TRACE_COLUMNS, deviation_statistics, plot_spec, prepare_section,
	SimulationResult, reference_offset, run_closed_loop, simulation_cost, stage_costs, switch_reference, trace_frame)
from ..lanetune.synthetic import generate_synthetic_dataset
from .helpers import small_generator, straight_section


#==============================================================================#
class TestReferenceSwitch:

	def test_reference_offset(self):
		section = straight_section(steps=5, bias=0.3)
		delta_d = reference_offset(section.true_curve, section.estimates[0], 20.0)
		assert delta_d == pytest.approx(-0.3)
		assert reference_offset(section.true_curve, section.true_curve, 20.0) == pytest.approx(0.0)

	def test_switch_reference(self):
		x = LateralState(0.1, 0.2, 0.3, 0.4)
		switched = switch_reference(x, 0.05)
		assert switched.to_array() == pytest.approx([0.15, 0.2, 0.3, 0.4])
		assert switch_reference(switched, -0.05).to_array() == pytest.approx(x.to_array())
		assert switch_reference(x, 0.0) == x

	def test_prepare_section(self):
		section = prepare_section(straight_section(steps=5, bias=0.2, heading_shift=2 * math.pi))
		assert section.offsets.delta_d == pytest.approx(np.full(5, -0.2))
		assert section.offsets.anchors == pytest.approx(section.profile['s'].to_numpy()[:5])
		assert section.offsets.heading_shift == pytest.approx(np.full(5, -2 * math.pi))

	def test_projection_failure(self):
		with pytest.raises(SimulationError) as info:
			prepare_section(straight_section(steps=5, bias=50.0))
		assert info.value.step == 0
		assert info.value.section_id == 'straight'


#==============================================================================#
class TestClosedLoop:

	def test_equilibrium(self, cfp, dcfp):
		result = run_closed_loop(straight_section(), cfp, dcfp=dcfp)
		assert np.all(np.abs(result.inputs) < 1e-9)
		assert np.all(np.abs(result.states) < 1e-9)
		assert result.total_cost == pytest.approx(0.0, abs=1e-12)

	def test_heading_branch_does_not_matter(self, cfp, dcfp):
		section = straight_section(x0=LateralState(0.3, 0.0, 0.0, 0.0))
		shifted = straight_section(x0=LateralState(0.3, 0.0, 0.0, 0.0), heading_shift=2 * math.pi)
		a = run_closed_loop(section, cfp, dcfp=dcfp)
		b = run_closed_loop(shifted, cfp, dcfp=dcfp)
		assert np.allclose(a.states, b.states, atol=1e-9)

	def test_frame_switch_identity(self, cfp, dcfp):
		dataset = generate_synthetic_dataset(small_generator(n_sections=5, lateral_sigma=0.0, heading_sigma=0.0))
		on_truth = SimulationConfig(plan_on_truth=True)
		for section in dataset:
			switched = run_closed_loop(section, cfp, dcfp=dcfp)
			direct = run_closed_loop(section, cfp, on_truth, dcfp)
			assert np.max(np.abs(switched.states - direct.states)) < 1e-7

	def test_regulation(self, dcfp):
		section = straight_section(steps=150, x0=LateralState(0.5, 0.0, 0.0, 0.0))
		result = run_closed_loop(section, dcfp.as_cfp(), dcfp=dcfp)
		assert np.all(np.abs(result.inputs) <= 0.02)
		settled = np.flatnonzero(np.abs(result.states[:, 0]) >= 0.05)
		assert settled.size > 0 and settled[-1] < 120
		assert deviation_statistics(result).within_envelope(1.0)

	def test_constant_bias_steady_state(self, dcfp):
		# The estimate sits b to the left of the true centre. Regulating the estimate-frame
		# offset d - b to zero leaves the vehicle at d = b with theta, kappa, kappa_dot and
		# u at zero, so each late stage costs q_d * b^2.
		bias = 0.2
		result = run_closed_loop(straight_section(steps=400, bias=bias), dcfp.as_cfp(), dcfp=dcfp)
		assert result.states[-1] == pytest.approx([bias, 0.0, 0.0, 0.0], abs=2e-3)
		assert np.abs(result.inputs[-50:]).max() < 1e-4
		assert result.per_step_cost[-1] == pytest.approx(dcfp.psi[0] * bias ** 2, rel=2e-2)
		assert result.per_step_cost[0] == pytest.approx(dcfp.psi[4] * result.inputs[0] ** 2)

	def test_bias_moves_the_vehicle_left(self, cfp, dcfp):
		# Same closed loop as a zero-bias run started at d = -b, seen b further left
		bias = 0.1
		biased = run_closed_loop(straight_section(steps=60, bias=bias), cfp, dcfp=dcfp)
		offset = run_closed_loop(straight_section(steps=60, x0=LateralState(-bias, 0.0, 0.0, 0.0)),
			cfp, dcfp=dcfp)
		assert biased.inputs == pytest.approx(offset.inputs, abs=1e-8)
		assert biased.states[:, 0] == pytest.approx(offset.states[:, 0] + bias, abs=1e-8)

	def test_determinism(self, cfp, dcfp):
		section = straight_section(steps=20, bias=0.1)
		a = run_closed_loop(section, cfp, dcfp=dcfp)
		b = run_closed_loop(section, cfp, dcfp=dcfp)
		assert np.array_equal(a.states, b.states)
		assert a.total_cost == b.total_cost

	def test_without_dcfp(self, cfp):
		result = run_closed_loop(straight_section(steps=5), cfp)
		assert math.isnan(result.total_cost)

	def test_constant_horizon_velocity(self, cfp, dcfp):
		cfg = SimulationConfig()
		cfg = replace(cfg, planner=replace(cfg.planner, horizon_velocity='constant'), warm_start=False)
		result = run_closed_loop(straight_section(steps=10, bias=0.1), cfp, cfg, dcfp)
		assert math.isfinite(result.total_cost)


#==============================================================================#
class TestSimulationCost:

	def test_single_step(self):
		dcfp = DesiredCostParams((10.0, 1.0, 1.0, 1.0, 1.0))
		states = np.array([[0.5, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0]])
		cost = stage_costs(states, np.zeros(1), np.zeros((2, 4)), dcfp)
		assert cost.sum() == pytest.approx(2.5)

	def test_recomputation(self, cfp, dcfp):
		section = generate_synthetic_dataset(small_generator(n_sections=1)).sections[0]
		result = run_closed_loop(section, cfp, dcfp=dcfp)
		assert simulation_cost(result, section.true_curve, section.profile, dcfp) == \
			pytest.approx(result.total_cost, rel=1e-12)
		assert result.per_step_cost.sum() == pytest.approx(result.total_cost, rel=1e-9)

	def test_dcfp_scaling(self, cfp, dcfp):
		section = straight_section(steps=10, bias=0.1)
		result = run_closed_loop(section, cfp, dcfp=dcfp)
		scaled = DesiredCostParams(tuple(3.0 * w for w in dcfp.psi))
		assert simulation_cost(result, section.true_curve, section.profile, scaled) == \
			pytest.approx(3.0 * result.total_cost)


#==============================================================================#
def test_trace_frame_and_plot_spec(cfp, dcfp):
	result = run_closed_loop(straight_section(steps=10, bias=0.1), cfp, dcfp=dcfp)
	frame = trace_frame(result)
	assert list(frame.columns) == TRACE_COLUMNS
	assert len(frame) == 11
	assert math.isnan(frame['u'].iloc[-1])
	assert frame['stage_cost'].sum() == pytest.approx(result.total_cost)
	spec = plot_spec(result, 'trace.csv')
	assert spec['source'] == 'trace.csv'
	assert len(spec['panels']) == 5


#______________________________________________________________________________#
def test_deviation_statistics(cfp):
	result = run_closed_loop(straight_section(steps=10, bias=0.1), cfp)
	stats = deviation_statistics(result)
	assert set(stats.max_abs) == {'d', 'theta', 'kappa', 'kappa_dot', 'u'}
	assert stats.max_abs['d'] >= stats.rms['d'] >= stats.mean_abs['d'] >= 0


#______________________________________________________________________________#
def test_deviation_statistics_without_steps():
	result = SimulationResult('empty', np.zeros(1), np.array([[0.2, 0.0, 0.0, 0.0]]), np.zeros(0),
		np.zeros((1, 4)), np.zeros(1), 0.0)
	stats = deviation_statistics(result)
	assert stats.max_abs['d'] == pytest.approx(0.2)
	assert stats.rms['d'] == pytest.approx(0.2)
	assert all(math.isnan(stats_dict['u']) for stats_dict in (stats.mean_abs, stats.max_abs, stats.rms))
	assert stats.within_envelope(1.0)
