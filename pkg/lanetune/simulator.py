"""
Closed-loop simulation of the planner against noisy lane-centre estimates.

At every step the true-frame state is switched onto the step's estimated
curve, the planner solves its horizon problem there, and the first input is
applied to the true-frame state. The run is scored against the true lane
centre with the simulation cost.
"""

import math
import numpy as np
import pandas as pd
from dataclasses import dataclass, field
from typing import Optional, Tuple
from .checks import generic_check_handler
from .containers import SimulationConfig
from .data import Section, SectionOffsets, check_section, planning_extent, with_offsets
from .exceptions import InputError, LaneTuneError, SimulationError
from .geometry import Curve, project_point
from .kinematics import LateralState, propagate, system_matrices
from .planner import (CostParams, DesiredCostParams, PlanningContext, expand_weights,
	horizon_model, plan)
from .qpsolver import QpWorkspace

#_____ GLOBALS _____#
STATE_COLUMNS = ['d', 'theta', 'kappa', 'kappa_dot']
TRACE_COLUMNS = ['j', 't', *STATE_COLUMNS, 'u', *[f"{c}_des" for c in STATE_COLUMNS], 'stage_cost']

__all__ = ['DesiredCostParams', 'SimulationResult', 'DeviationStats', 'reference_offset',
	'switch_reference', 'prepare_section', 'run_closed_loop', 'simulation_cost',
	'stage_costs', 'true_desired_states', 'trace_frame', 'plot_spec', 'deviation_statistics']



#================================================================================#
@dataclass
class SimulationResult:

	"""
	Outcome of one closed-loop run.

	Attributes:
		section_id: the simulated section.
		times: (M+1,) step times, s.
		states: (M+1, 4) states in the true-curve frame.
		inputs: (M,) applied first inputs.
		desired: (M+1, 4) desired states from the true curve.
		per_step_cost: (M+1,) stage costs (NaN when no DCFP was given).
		total_cost: sum of the stage costs.
		iterations / kkt_residuals: (M,) solver diagnostics per step.
	"""

	section_id: str
	times: np.ndarray
	states: np.ndarray
	inputs: np.ndarray
	desired: np.ndarray
	per_step_cost: np.ndarray
	total_cost: float
	iterations: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
	kkt_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

	@property
	def steps(self) -> int:
		return self.inputs.shape[0]

	def state(self, j: int) -> LateralState:
		return LateralState.from_array(self.states[j])


#________________________________________________________________________________#
@dataclass
class DeviationStats:

	"""Absolute deviations of the states from the desired states, and of the input."""

	mean_abs: dict
	max_abs: dict
	rms: dict

	def within_envelope(self, limit: float = 1.0) -> bool:
		"""Max |d| below the envelope, m."""
		return self.max_abs['d'] < limit

	def to_dict(self) -> dict:
		return {'mean_abs': self.mean_abs, 'max_abs': self.max_abs, 'rms': self.rms}
#================================================================================#



#================================================================================#
#_____ Reference switching ______________________________________________________#
def reference_offset(true_curve: Curve, est_curve: Curve, s_sim: float,
										corridor: float = 20.0) -> float:
	"""Signed lateral offset of the true-curve point at `s_sim` measured against the estimate."""
	_, delta_d = project_point(est_curve, true_curve.point(s_sim), corridor)
	return delta_d


def switch_reference(x_sim: LateralState, delta_d: float) -> LateralState:
	"""Express a true-frame state relative to the estimate: only d changes."""
	return LateralState(x_sim.d + delta_d, x_sim.theta, x_sim.kappa, x_sim.kappa_dot)


#________________________________________________________________________________#
def prepare_section(section: Section, cfg: Optional[SimulationConfig] = None) -> Section:
	"""
	Attach the CFP-independent reference offsets of every step: delta_d, the
	planning anchor on the estimate and the heading branch shift.

	Estimates must cover the planning horizon (see `data.planning_extent`).
	"""
	cfg = cfg or SimulationConfig()
	check_section(section, planning_extent(section, cfg.planner.horizon))
	M = section.steps
	s_sim = section.profile['s'].to_numpy()
	delta_d = np.empty(M)
	anchors = np.empty(M)
	shift   = np.empty(M)
	true_heading = np.asarray(section.true_curve.heading(s_sim[:M]))
	points = section.true_curve.point(s_sim[:M])

	for j, est in enumerate(section.estimates):
		try:
			anchors[j], delta_d[j] = project_point(est, points[j], cfg.corridor)
		except LaneTuneError as e:
			raise SimulationError(f"Section {section.id}, step {j}: {e}", section.id, j) from e
		est_heading = float(est.heading(anchors[j]))
		shift[j] = 2 * math.pi * round((true_heading[j] - est_heading) / (2 * math.pi))
	return with_offsets(section, SectionOffsets(delta_d, anchors, shift))
#================================================================================#



#================================================================================#
def _horizon_velocities(v: np.ndarray, j: int, N: int, mode: str) -> np.ndarray:
	if mode == 'constant':
		return np.full(N, v[j])
	idx = np.minimum(np.arange(j, j + N), len(v) - 1)
	return v[idx]


#________________________________________________________________________________#
def run_closed_loop(section: Section, cfp: CostParams,
										cfg: Optional[SimulationConfig] = None,
										dcfp: Optional[DesiredCostParams] = None) -> SimulationResult:
	"""
	Simulate a section in receding-horizon fashion.

	### Parameters:
	- section: the section (offsets are computed when missing).
	- cfp: planner weights.
	- cfg: simulation settings.
	- dcfp: desired weights; when given the stage costs are filled in.

	### Raises:
	- SimulationError: a step failed; carries the section id and step index.
	"""
	cfg = cfg or SimulationConfig()
	planner_cfg = cfg.planner
	N, Ts = planner_cfg.horizon, section.sample_time
	M = section.steps
	profile = section.profile
	v, s_sim = profile['v'].to_numpy(), profile['s'].to_numpy()

	if not cfg.plan_on_truth and section.offsets is None:
		section = prepare_section(section, cfg)
	offsets = section.offsets

	weights   = expand_weights(cfp, N)
	workspace = QpWorkspace(cfg.qp) if cfg.warm_start else None
	true_heading = np.asarray(section.true_curve.heading(s_sim))

	states = np.empty((M + 1, 4))
	inputs = np.empty(M)
	iterations = np.zeros(M, dtype=int)
	residuals  = np.zeros(M)
	states[0] = section.x0.to_array()

	for j in range(M):
		try:
			velocities = _horizon_velocities(v, j, N, planner_cfg.horizon_velocity)
			travel = np.concatenate(([0.0], np.cumsum(velocities * Ts)))
			x_plan = states[j].copy()
			if cfg.plan_on_truth:
				curve, anchor, heading_offset = section.true_curve, s_sim[j], 0.0
			else:
				curve, anchor, heading_offset = (section.estimates[j], offsets.anchors[j],
					offsets.heading_shift[j])
				x_plan[0] += offsets.delta_d[j]
			ctx = PlanningContext(x_plan, velocities, anchor + travel, curve, Ts,
				planner_cfg.u_min, planner_cfg.u_max, heading_offset)
			result = plan(ctx, cfp, cfg.qp, weights, workspace, horizon_model(ctx), predict=False)
		except LaneTuneError as e:
			raise SimulationError(f"Section {section.id}, step {j}: {e}", section.id, j) from e

		inputs[j] = result.inputs[0]
		iterations[j] = result.iterations
		residuals[j]  = result.kkt_residual
		states[j + 1] = propagate(states[j], inputs[j], true_heading[j], system_matrices(v[j], Ts))

	desired = true_desired_states(section.true_curve, profile)
	if dcfp is not None:
		per_step = stage_costs(states, inputs, desired, dcfp)
		total = float(per_step.sum())
	else:
		per_step, total = np.full(M + 1, np.nan), math.nan

	return SimulationResult(section.id, profile['t'].to_numpy(), states, inputs, desired,
		per_step, total, iterations, residuals)
#================================================================================#



#================================================================================#
#_____ Simulation cost __________________________________________________________#
def true_desired_states(true_curve: Curve, profile: pd.DataFrame) -> np.ndarray:
	"""(M+1, 4) desired states [0, theta_r, kappa_r, kappa_dot_r] along the true curve."""
	_, theta, kappa, kappa_dot = true_curve.frames(profile['s'].to_numpy())
	return np.column_stack([np.zeros(len(profile)), theta, kappa, kappa_dot])


def stage_costs(states: np.ndarray, inputs: np.ndarray, desired: np.ndarray,
								dcfp: DesiredCostParams) -> np.ndarray:
	"""
	Per-step simulation cost: weighted squared state error for j = 0..M plus the
	weighted squared input for j = 0..M-1.
	"""
	generic_check_handler([
		(states.shape == desired.shape, f"States {states.shape} and desired {desired.shape} differ.",
			InputError),
		(inputs.shape == (states.shape[0] - 1,),
			f"Expected {states.shape[0] - 1} inputs, got {inputs.shape}.", InputError),
	])
	w = dcfp.weights
	cost = ((states - desired) ** 2) @ w[:4]
	cost[:-1] += w[4] * inputs ** 2
	return cost


def simulation_cost(result: SimulationResult, true_curve: Curve, profile: pd.DataFrame,
										dcfp: DesiredCostParams) -> float:
	"""Total simulation cost of a run, recomputed against the true curve."""
	if len(profile) != result.states.shape[0]:
		raise InputError(f"Profile has {len(profile)} rows, result has {result.states.shape[0]} states.")
	desired = true_desired_states(true_curve, profile)
	return float(stage_costs(result.states, result.inputs, desired, dcfp).sum())
#================================================================================#



#================================================================================#
#_____ Traces and statistics ____________________________________________________#
def trace_frame(result: SimulationResult) -> pd.DataFrame:
	"""Per-step trace; the input of the last row is NaN."""
	M = result.steps
	frame = pd.DataFrame(result.states, columns=STATE_COLUMNS)
	frame.insert(0, 't', result.times)
	frame.insert(0, 'j', np.arange(M + 1))
	frame['u'] = np.append(result.inputs, np.nan)
	for i, column in enumerate(STATE_COLUMNS):
		frame[f"{column}_des"] = result.desired[:, i]
	frame['stage_cost'] = result.per_step_cost
	return frame[TRACE_COLUMNS]


def plot_spec(result: SimulationResult, csv_name: str) -> dict:
	"""Data-only description of the trace plot: one panel per state plus the input."""
	panels = [{'y': column, 'reference': f"{column}_des", 'label': column} for column in STATE_COLUMNS]
	panels.append({'y': 'u', 'label': 'u'})
	return {'source': csv_name, 'x': 't', 'section': result.section_id, 'panels': panels,
		'title': f"Closed loop on section {result.section_id}"}


#________________________________________________________________________________#
def _abs_stats(values: np.ndarray) -> Tuple[float, float, float]:
	"""Mean, max and RMS of |values|; NaN when there are none."""
	if values.size == 0:
		return math.nan, math.nan, math.nan
	a = np.abs(values)
	return float(a.mean()), float(a.max()), float(np.sqrt(np.mean(a ** 2)))


def deviation_statistics(result: SimulationResult) -> DeviationStats:
	"""Mean, max and RMS absolute deviation of each state and of the input."""
	errors = np.asarray(result.states - result.desired).reshape(-1, len(STATE_COLUMNS))
	columns = {c: errors[:, i] for i, c in enumerate(STATE_COLUMNS)}
	columns['u'] = np.asarray(result.inputs)
	mean_abs, max_abs, rms = {}, {}, {}
	for column, values in columns.items():
		mean_abs[column], max_abs[column], rms[column] = _abs_stats(values)
	return DeviationStats(mean_abs, max_abs, rms)
#================================================================================#
