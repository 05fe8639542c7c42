"""
Concrete sources and studies for `TemplatePipeline`: dataset loading with the
train/test split, tuning, evaluation, traces and the multi-DCFP experiment.
"""

import pandas as pd
from dataclasses import dataclass, field
from pathlib import Path
from . import logging
from .containers import Config, DeConfig, Report, SimulationConfig, SplitConfig
from .data import Dataset, check_section, load_dataset, planning_extent, split_train_test
from .exceptions import InputError
from .experiment import relative_change, run_experiment
from .planner import CostParams, DesiredCostParams
from .simulator import deviation_statistics, plot_spec, prepare_section, run_closed_loop, trace_frame
from .tuner import evaluate_cfp, tune

#_____ GLOBALS _____#
SPLITS = ('train', 'test', 'all')



#================================================================================#
#_____ Source ___________________________________________________________________#
@dataclass
class DatasetSource:

	"""
	Loads a dataset and returns one side of its train/test split.

	### Parameters:
	- path: dataset directory or manifest.
	- split: 'train', 'test' or 'all'.
	- split_cfg: fraction and seed of the split.
	- sim_cfg: every loaded estimate must cover this config's planning horizon.
	"""

	path: str | Path
	split: str = 'all'
	split_cfg: SplitConfig = field(default_factory=SplitConfig)
	sim_cfg: SimulationConfig = field(default_factory=SimulationConfig)

	def run(self) -> Dataset:
		if self.split not in SPLITS:
			raise InputError(f"split must be one of {SPLITS}, got '{self.split}'.")
		dataset = load_dataset(self.path)
		for section in dataset:
			check_section(section, planning_extent(section, self.sim_cfg.planner.horizon))
		if self.split == 'all':
			return dataset
		train, test = split_train_test(dataset, self.split_cfg.test_fraction, self.split_cfg.rng_seed)
		return train if self.split == 'train' else test
#================================================================================#



#================================================================================#
#_____ Studies __________________________________________________________________#
@dataclass
class TuneStudy:
	dcfp: DesiredCostParams
	de: DeConfig = field(default_factory=DeConfig)
	sim_cfg: SimulationConfig = field(default_factory=SimulationConfig)

	def run(self, dataset: Dataset) -> Report:
		result = tune(dataset.sections, self.dcfp, self.de, self.sim_cfg)
		document = {
			'dcfp': self.dcfp.to_dict(),
			'sections': [s.id for s in dataset.sections],
			'de': self.de.to_dict(),
			**result.to_dict(),
		}
		summary = (f"best CFP: {', '.join(f'{w:.4g}' for w in result.best_cfp.theta0)}, "
			f"decay {result.best_cfp.decay:.4f}\n"
			f"train cost: {result.initial_cost:.6g} (DCFP seed) -> {result.best_cost:.6g} "
			f"after {result.evaluations} evaluations")
		return Report('tuning', document, pd.DataFrame({'history': result.history}), summary)


#________________________________________________________________________________#
@dataclass
class EvaluateStudy:

	"""
	Cost of a CFP against the DCFP-as-CFP baseline (decay 1) on every section;
	a negative relative change is an improvement.
	"""

	cfp: CostParams
	dcfp: DesiredCostParams
	sim_cfg: SimulationConfig = field(default_factory=SimulationConfig)

	def run(self, dataset: Dataset) -> Report:
		sections = [prepare_section(s, self.sim_cfg) for s in dataset.sections]
		baseline = evaluate_cfp(sections, self.dcfp.as_cfp(), self.dcfp, self.sim_cfg)
		candidate = evaluate_cfp(sections, self.cfp, self.dcfp, self.sim_cfg)
		change = relative_change(candidate.total, baseline.total)
		table = pd.DataFrame({
			'section': list(baseline.per_section),
			'baseline': list(baseline.per_section.values()),
			'cfp': [candidate.per_section[i] for i in baseline.per_section],
		})
		document = {
			'dcfp': self.dcfp.to_dict(),
			'cfp': self.cfp.to_dict(),
			'baseline_total': baseline.total,
			'cfp_total': candidate.total,
			'relative_change': change,
			'per_section': table.to_dict(orient='records'),
			'failures': {**baseline.failures, **candidate.failures},
		}
		summary = (f"baseline: {baseline.total:.6g}\ncfp:      {candidate.total:.6g}\n"
			f"change:   {change:+.2f} %")
		return Report('evaluation', document, table, summary)


#________________________________________________________________________________#
@dataclass
class TraceStudy:
	section_id: str
	cfp: CostParams
	dcfp: DesiredCostParams
	sim_cfg: SimulationConfig = field(default_factory=SimulationConfig)
	csv_name: str = 'trace.csv'

	def run(self, dataset: Dataset) -> Report:
		section = dataset.get(self.section_id)
		result = run_closed_loop(section, self.cfp, self.sim_cfg, self.dcfp)
		stats = deviation_statistics(result)
		document = {**plot_spec(result, self.csv_name), 'total_cost': result.total_cost,
			'deviations': stats.to_dict()}
		if not stats.within_envelope(self.sim_cfg.offset_envelope):
			logging.warning(f"Section {section.id}: max |d| {stats.max_abs['d']:.3f} m exceeds the "
				f"{self.sim_cfg.offset_envelope} m envelope.")
		summary = (f"section {section.id}: {result.steps} steps, cost {result.total_cost:.6g}, "
			f"max |d| {stats.max_abs['d']:.4f} m")
		return Report('trace', document, trace_frame(result), summary)


#________________________________________________________________________________#
@dataclass
class ExperimentStudy:
	cfg: Config = field(default_factory=Config)

	def run(self, dataset: Dataset) -> Report:
		report = run_experiment(dataset, self.cfg)
		lines = [f"set {row.index}: train {row.train_change:+.2f} %, test {row.test_change:+.2f} %, "
			f"decay {row.cfp.decay:.3f}" for row in report.rows]
		lines.append(f"mean test change: {report.mean_test_change:+.2f} %")
		return Report('experiment', report.to_dict(), report.to_frame(), '\n'.join(lines))
#================================================================================#

