"""
Multi-DCFP experiment: calibrate neutral weights, draw random desired-cost
sets, tune the planner for each on the training split and compare against the
seeded CFP on both splits.
"""

import math
import numpy as np
import pandas as pd
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence
from . import logging
from .containers import Config, SimulationConfig
from .data import Dataset, Section, random_dcfp, split_train_test
from .exceptions import InputError
from .planner import CostParams, DesiredCostParams
from .simulator import prepare_section, run_closed_loop
from .tuner import decode, evaluate_cfp, seed_genome, tune

#_____ GLOBALS _____#
ROW_COLUMNS = ['set', 'train_base', 'train_opt', 'train_change', 'test_base', 'test_opt',
	'test_change', 'decay']



#================================================================================#
def relative_change(optimised: float, baseline: float) -> float:
	"""Percentage change against the baseline; negative is an improvement."""
	if not (baseline > 0 and math.isfinite(baseline)):
		return math.nan
	return (optimised - baseline) / baseline * 100.0


#________________________________________________________________________________#
def calibrate_neutral_weights(sections: Sequence[Section], pilot_cfps: Sequence[Sequence[float]],
															sim_cfg: Optional[SimulationConfig] = None) -> DesiredCostParams:
	"""
	Neutral desired weights: inverse variances of the state errors and of the
	input, pooled over closed-loop runs with hand-set pilot CFPs.
	"""
	errors: List[np.ndarray] = []
	inputs: List[np.ndarray] = []
	for values in pilot_cfps:
		cfp = CostParams.from_sequence(values)
		for section in sections:
			result = run_closed_loop(section, cfp, sim_cfg)
			errors.append(result.states - result.desired)
			inputs.append(result.inputs)
	if not errors:
		raise InputError("Calibration needs at least one section and one pilot CFP.")

	variances = np.append(np.var(np.vstack(errors), axis=0), np.var(np.concatenate(inputs)))
	if not np.all(variances > 0):
		raise InputError(f"Pilot runs show no variation in some channels: variances {variances.tolist()}.")
	neutral = DesiredCostParams(tuple(1.0 / variances))
	logging.info(f"Neutral weights: {', '.join(f'{w:.3g}' for w in neutral.psi)}")
	return neutral


#________________________________________________________________________________#
def rescale_to_reference(cfp: CostParams, dcfp: DesiredCostParams) -> CostParams:
	"""
	Scale the CFP weights by the geometric mean of psi / theta0, so tuned weights
	are read on the DCFP's scale. The planner's minimiser does not change.
	"""
	factor = float(np.exp(np.mean(np.log(dcfp.weights / cfp.weights))))
	return cfp.scaled(factor)
#================================================================================#



#================================================================================#
@dataclass
class ExperimentRow:
	index: int
	dcfp: DesiredCostParams
	cfp: CostParams
	train_base: float
	train_opt: float
	test_base: float
	test_opt: float
	history: List[float] = field(default_factory=list)

	@property
	def train_change(self) -> float:
		return relative_change(self.train_opt, self.train_base)

	@property
	def test_change(self) -> float:
		return relative_change(self.test_opt, self.test_base)

	def to_dict(self) -> dict:
		return {
			'set': self.index,
			'dcfp': list(self.dcfp.psi),
			'cfp': self.cfp.to_dict(),
			'cfp_rescaled': rescale_to_reference(self.cfp, self.dcfp).to_dict(),
			'train_base': self.train_base,
			'train_opt': self.train_opt,
			'train_change': self.train_change,
			'test_base': self.test_base,
			'test_opt': self.test_opt,
			'test_change': self.test_change,
			'history': list(self.history),
		}


#________________________________________________________________________________#
@dataclass
class ExperimentReport:

	"""
	Per-DCFP-set results and their aggregate.

	Attributes:
		rows: one row per DCFP set.
		neutral: the calibrated neutral weights.
		train_ids / test_ids: the split.
	"""

	rows: List[ExperimentRow]
	neutral: DesiredCostParams
	train_ids: List[str]
	test_ids: List[str]

	@property
	def mean_test_change(self) -> float:
		return float(np.mean([row.test_change for row in self.rows]))

	@property
	def mean_train_change(self) -> float:
		return float(np.mean([row.train_change for row in self.rows]))

	def to_dict(self) -> dict:
		return {
			'neutral': list(self.neutral.psi),
			'train_ids': self.train_ids,
			'test_ids': self.test_ids,
			'rows': [row.to_dict() for row in self.rows],
			'mean_train_change': self.mean_train_change,
			'mean_test_change': self.mean_test_change,
		}

	def to_frame(self) -> pd.DataFrame:
		frame = pd.DataFrame([[row.index, row.train_base, row.train_opt, row.train_change,
			row.test_base, row.test_opt, row.test_change, row.cfp.decay] for row in self.rows],
			columns=ROW_COLUMNS)
		for i, name in enumerate(('q_d', 'q_theta', 'q_kappa', 'q_kappa_dot', 'r_u')):
			frame[f"dcfp_{name}"] = [row.dcfp.psi[i] for row in self.rows]
		for i, name in enumerate(('w_d', 'w_theta', 'w_kappa', 'w_kappa_dot', 'w_u')):
			frame[f"cfp_{name}"] = [row.cfp.theta0[i] for row in self.rows]
		return frame
#================================================================================#



#================================================================================#
def run_experiment(dataset: Dataset, cfg: Optional[Config] = None) -> ExperimentReport:
	"""
	Split, calibrate, draw `cfg.experiment.n_dcfp_sets` desired-cost sets, tune
	each on the training split (tuner seed `experiment.rng_seed + i`) and compare
	both splits against the seed CFP: the DCFP as planner weights, clamped
	onto the search box as the tuner sees it.
	"""
	cfg = cfg or Config()
	sim_cfg, exp_cfg = cfg.simulation, cfg.experiment
	train, test = split_train_test(dataset, cfg.split.test_fraction, cfg.split.rng_seed)
	train_sections = [prepare_section(s, sim_cfg) for s in train]
	test_sections  = [prepare_section(s, sim_cfg) for s in test]

	neutral = calibrate_neutral_weights(train_sections, exp_cfg.pilot_cfps, sim_cfg)
	dcfps = random_dcfp(exp_cfg.rng_seed, exp_cfg.n_dcfp_sets, neutral, exp_cfg.factor_range)

	rows = []
	for i, dcfp in enumerate(dcfps):
		de = replace(cfg.de, rng_seed=exp_cfg.rng_seed + i)
		result = tune(train_sections, dcfp, de, sim_cfg)
		baseline = decode(seed_genome(dcfp))
		row = ExperimentRow(
			index=i,
			dcfp=dcfp,
			cfp=result.best_cfp,
			train_base=evaluate_cfp(train_sections, baseline, dcfp, sim_cfg).total,
			train_opt=result.best_cost,
			test_base=evaluate_cfp(test_sections, baseline, dcfp, sim_cfg).total,
			test_opt=evaluate_cfp(test_sections, result.best_cfp, dcfp, sim_cfg).total,
			history=result.history)
		rows.append(row)
		logging.info(f"Set {i}: train {row.train_change:+.2f} %, test {row.test_change:+.2f} %")

	report = ExperimentReport(rows, neutral, [s.id for s in train], [s.id for s in test])
	logging.info(f"Mean relative test change over {len(rows)} sets: {report.mean_test_change:+.2f} %")
	return report
#================================================================================#
