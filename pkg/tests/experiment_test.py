import math
import numpy as np
import pytest
from unittest.mock import patch
from ..lanetune import experiment
from ..lanetune.containers import Config, DeConfig, ExperimentConfig, SimulationConfig
from ..lanetune.data import Dataset
from ..lanetune.exceptions import InputError
from ..lanetune.experiment import calibrate_neutral_weights, relative_change, rescale_to_reference
from ..lanetune.planner import CostParams, DesiredCostParams
from ..lanetune.simulator import prepare_section
from ..lanetune.tuner import decode, evaluate_cfp, seed_genome
from .helpers import straight_section


#==============================================================================#
def test_relative_change():
	assert relative_change(90.0, 100.0) == pytest.approx(-10.0)
	assert relative_change(100.0, 100.0) == 0.0
	assert math.isnan(relative_change(1.0, 0.0))
	assert math.isnan(relative_change(1.0, math.inf))


#______________________________________________________________________________#
def test_rescale_to_reference():
	dcfp = DesiredCostParams((10.0, 1e4, 1e6, 1e5, 1e4))
	cfp = CostParams((1e-3, 1.0, 100.0, 10.0, 1.0), 0.9)
	rescaled = rescale_to_reference(cfp, dcfp)
	assert np.exp(np.mean(np.log(dcfp.weights / rescaled.weights))) == pytest.approx(1.0)
	assert rescaled.weights / cfp.weights == pytest.approx(np.full(5, rescaled.weights[0] / cfp.weights[0]))
	assert rescaled.decay == 0.9


#==============================================================================#
class TestCalibration:
	pilots = [(10.0, 1e4, 1e6, 1e5, 1e4, 1.0), (30.0, 3e3, 3e5, 1e5, 1e4, 0.98)]

	def test_inverse_variances(self):
		sections = [straight_section(steps=40, bias=0.2, section_id='a'),
			straight_section(steps=40, bias=-0.1, section_id='b')]
		neutral = calibrate_neutral_weights(sections, self.pilots)
		assert all(w > 0 and math.isfinite(w) for w in neutral.psi)

	def test_no_variation(self):
		with pytest.raises(InputError):
			calibrate_neutral_weights([straight_section(steps=10)], self.pilots,
				SimulationConfig(plan_on_truth=True))

	def test_no_pilots(self):
		with pytest.raises(InputError):
			calibrate_neutral_weights([straight_section(steps=10)], [])


#==============================================================================#
def test_baseline_is_the_clamped_seed():
	# log10(psi_d / psi_u) = 10 lies outside the search box, so the seed is clamped
	dcfp = DesiredCostParams((1e10, 1.0, 1.0, 1.0, 1.0))
	dataset = Dataset([straight_section(steps=20, bias=b, section_id=f"s{i}")
		for i, b in enumerate((0.2, -0.1, 0.15, -0.25))])
	cfg = Config(de=DeConfig(population_size=5, max_generations=1, parallel_workers=1),
		experiment=ExperimentConfig(n_dcfp_sets=1))
	with patch.object(experiment, 'random_dcfp', return_value=[dcfp]):
		report = experiment.run_experiment(dataset, cfg)

	row = report.rows[0]
	train = [prepare_section(dataset.get(i), cfg.simulation) for i in report.train_ids]
	seed = decode(seed_genome(dcfp))
	assert seed.theta0[0] == pytest.approx(1e8)
	assert row.train_base == evaluate_cfp(train, seed, dcfp, cfg.simulation).total
	assert row.train_opt <= row.train_base
