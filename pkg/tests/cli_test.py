import json
import numpy as np
import pandas as pd
import pytest
from unittest.mock import patch
from ..lanetune import cli, studies
from ..lanetune.data import Dataset, save_dataset
from ..lanetune.exceptions import InputError, TuningError
from .helpers import straight_section

#_____ GLOBALS _____#
DCFP = '40,2e4,1e6,2e5,1e4'
CFP  = '10,1e4,1e6,1e5,1e4,0.98'
SMALL_CONFIG = {
	'generator': {'n_sections': 3, 'duration': [3.0, 4.0], 'rng_seed': 5},
	'noise': {'lookahead': 100.0},
	'de': {'population_size': 6, 'max_generations': 2, 'parallel_workers': 1},
}


#==============================================================================#
@pytest.fixture(scope='module')
def workspace(tmp_path_factory):
	root = tmp_path_factory.mktemp('cli')
	config = root / 'config.json'
	config.write_text(json.dumps(SMALL_CONFIG))
	assert cli.main(['generate', '--config', str(config), '--out', str(root / 'data')]) == cli.EXIT_OK
	return root, config


#==============================================================================#
class TestParsing:

	def test_parse_dcfp(self):
		assert cli.parse_dcfp(DCFP).theta0 == (40.0, 2e4, 1e6, 2e5, 1e4)
		with pytest.raises(InputError):
			cli.parse_dcfp('1,2,3')
		with pytest.raises(InputError):
			cli.parse_dcfp('1,2,x,4,5')

	def test_parse_cfp(self):
		assert cli.parse_cfp(CFP).decay == 0.98
		assert cli.parse_cfp('1,2,3,4,5').decay == 1.0

	def test_parse_cfp_from_report(self, tmp_path):
		report = tmp_path / 'tuning.json'
		report.write_text(json.dumps({'best_cfp': {'theta0': [1, 2, 3, 4, 1], 'decay': 0.9}}))
		cfp = cli.parse_cfp(str(report))
		assert cfp.theta0 == (1, 2, 3, 4, 1)
		assert cfp.decay == 0.9
		report.write_text(json.dumps({'best_cost': 1.0}))
		with pytest.raises(InputError):
			cli.parse_cfp(str(report))

	def test_parse_cfp_from_non_object_json(self, tmp_path, workspace):
		report = tmp_path / 'weights.json'
		report.write_text(json.dumps([1, 2, 3, 4, 5]))
		with pytest.raises(InputError):
			cli.parse_cfp(str(report))
		root, config = workspace
		assert cli.main(['evaluate', '--config', str(config), '--dataset', str(root / 'data'),
			'--cfp', str(report), '--dcfp', DCFP]) == cli.EXIT_INPUT

	def test_missing_arguments(self):
		with pytest.raises(SystemExit):
			cli.main(['tune', '--dcfp', DCFP])
		with pytest.raises(SystemExit):
			cli.main([])


#==============================================================================#
class TestCommands:

	def test_generate(self, workspace):
		root, _ = workspace
		assert (root / 'data' / 'manifest.json').exists()

	def test_missing_dataset(self, tmp_path):
		assert cli.main(['evaluate', '--dataset', str(tmp_path / 'nope'), '--cfp', CFP,
			'--dcfp', DCFP]) == cli.EXIT_INPUT

	def test_bad_dcfp(self, workspace):
		root, config = workspace
		assert cli.main(['tune', '--config', str(config), '--dataset', str(root / 'data'),
			'--dcfp', '1,2']) == cli.EXIT_INPUT

	def test_bad_config(self, tmp_path, workspace):
		root, _ = workspace
		config = tmp_path / 'bad.json'
		config.write_text(json.dumps({'planner': {'horizn': 3}}))
		assert cli.main(['evaluate', '--config', str(config), '--dataset', str(root / 'data'),
			'--cfp', CFP, '--dcfp', DCFP]) == cli.EXIT_INPUT

	def test_evaluate(self, workspace, tmp_path, capsys):
		root, config = workspace
		out = tmp_path / 'evaluation.json'
		assert cli.main(['evaluate', '--config', str(config), '--dataset', str(root / 'data'),
			'--split', 'all', '--cfp', CFP, '--dcfp', DCFP, '--out', str(out)]) == cli.EXIT_OK
		document = json.loads(out.read_text())
		assert len(document['per_section']) == 3
		assert 'change' in capsys.readouterr().out

	def test_trace(self, workspace, tmp_path):
		root, config = workspace
		out = tmp_path / 'trace.csv'
		assert cli.main(['trace', '--config', str(config), '--dataset', str(root / 'data'),
			'--section', 'syn-001', '--cfp', CFP, '--dcfp', DCFP, '--out', str(out)]) == cli.EXIT_OK
		assert out.exists()
		assert (tmp_path / 'trace.plot.json').exists()

	def test_trace_unknown_section(self, workspace, tmp_path):
		root, config = workspace
		assert cli.main(['trace', '--config', str(config), '--dataset', str(root / 'data'),
			'--section', 'syn-999', '--cfp', CFP, '--dcfp', DCFP,
			'--out', str(tmp_path / 'trace.csv')]) == cli.EXIT_INPUT

	def test_trace_of_noise_free_section_has_no_input(self, tmp_path):
		save_dataset(Dataset([straight_section(steps=40)]), tmp_path / 'data')
		out = tmp_path / 'trace.csv'
		assert cli.main(['trace', '--dataset', str(tmp_path / 'data'), '--section', 'straight',
			'--cfp', CFP, '--dcfp', DCFP, '--out', str(out)]) == cli.EXIT_OK
		trace = pd.read_csv(out)
		assert len(trace) == 41
		assert np.all(np.abs(trace['u'].dropna()) < 1e-9)
		assert np.all(np.abs(trace['d']) < 1e-9)

	def test_trace_stage_costs_sum_to_evaluated_cost(self, workspace, tmp_path):
		root, config = workspace
		evaluation = tmp_path / 'evaluation.json'
		assert cli.main(['evaluate', '--config', str(config), '--dataset', str(root / 'data'),
			'--split', 'all', '--cfp', CFP, '--dcfp', DCFP, '--out', str(evaluation)]) == cli.EXIT_OK
		costs = {row['section']: row['cfp'] for row in json.loads(evaluation.read_text())['per_section']}
		for section_id, cost in costs.items():
			out = tmp_path / f"{section_id}.csv"
			assert cli.main(['trace', '--config', str(config), '--dataset', str(root / 'data'),
				'--section', section_id, '--cfp', CFP, '--dcfp', DCFP, '--out', str(out)]) == cli.EXIT_OK
			assert pd.read_csv(out)['stage_cost'].sum() == pytest.approx(cost, rel=1e-9)

	def test_tune(self, workspace, tmp_path):
		root, config = workspace
		out = tmp_path / 'tuning.json'
		assert cli.main(['tune', '--config', str(config), '--dataset', str(root / 'data'),
			'--dcfp', DCFP, '--generations', '1', '--seed', '3', '--out', str(out)]) == cli.EXIT_OK
		document = json.loads(out.read_text())
		assert document['de']['max_generations'] == 1
		assert document['de']['rng_seed'] == 3
		assert document['best_cost'] <= document['initial_cost']
		# the report feeds straight back into evaluate
		assert cli.main(['evaluate', '--config', str(config), '--dataset', str(root / 'data'),
			'--cfp', str(out), '--dcfp', DCFP]) == cli.EXIT_OK

	def test_numerical_failure(self, workspace):
		root, config = workspace
		with patch.object(studies, 'tune', side_effect=TuningError('every individual failed')):
			assert cli.main(['tune', '--config', str(config), '--dataset', str(root / 'data'),
				'--dcfp', DCFP]) == cli.EXIT_NUMERICAL
