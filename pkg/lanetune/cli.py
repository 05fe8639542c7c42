"""
Command line entry point.

	lanetune generate   --out DIR [--config FILE] [--seed N] [--sections N]
	lanetune tune       --dataset DIR --dcfp W,W,W,W,W [--split train] [--out FILE]
	lanetune evaluate   --dataset DIR --cfp W,...|REPORT --dcfp W,W,W,W,W [--split test]
	lanetune trace      --dataset DIR --section ID --cfp W,...|REPORT --dcfp ... --out FILE
	lanetune experiment --dataset DIR --out FILE [--sets N] [--seed N]

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

import sys
import argparse
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence
from . import logging
from .configfile import read_config, read_json
from .containers import Config
from .data import save_dataset
from .exceptions import InputError, LaneTuneError
from .pipeline import TemplatePipeline
from .planner import CostParams, DesiredCostParams
from .reports import JsonReportWriter, TraceWriter
from .studies import DatasetSource, EvaluateStudy, ExperimentStudy, TraceStudy, TuneStudy
from .synthetic import generate_synthetic_dataset

#_____ GLOBALS _____#
EXIT_OK        = 0
EXIT_INPUT     = 2
EXIT_NUMERICAL = 3



#================================================================================#
# Argument parsing ______________________________________________________________#
#================================================================================#
def parse_values(text: str) -> List[float]:
	try:
		return [float(v) for v in text.split(',') if v.strip() != '']
	except ValueError as e:
		raise InputError(f"Expected comma-separated numbers, got '{text}'.") from e


def parse_dcfp(text: str) -> DesiredCostParams:
	values = parse_values(text)
	if len(values) != 5:
		raise InputError(f"--dcfp needs 5 comma-separated weights, got {len(values)}.")
	return DesiredCostParams(tuple(values))


def parse_cfp(text: str) -> CostParams:
	"""Five weights, five weights and a decay, or a tuning report JSON file."""
	path = Path(text)
	if path.suffix.lower() == '.json':
		report = read_json(path)
		if not isinstance(report, dict):
			raise InputError(f"{path} must hold a JSON object, got {type(report).__name__}.")
		raw = report.get('best_cfp', report)
		if not isinstance(raw, dict) or 'theta0' not in raw:
			raise InputError(f"{path} holds no CFP ('best_cfp' or 'theta0').")
		return CostParams(tuple(raw['theta0']), raw.get('decay', 1.0))
	return CostParams.from_sequence(parse_values(text))


#________________________________________________________________________________#
def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog='lanetune',
		description='Closed-loop simulation and tuning of an MPC lane-keeping planner.')
	commands = parser.add_subparsers(dest='command', required=True)

	def common(sub: argparse.ArgumentParser) -> None:
		sub.add_argument('--config', default=None, help='JSON or TOML config file')
		sub.add_argument('--seed', type=int, default=None, help='override the command\'s rng seed')
		sub.add_argument('--workers', type=int, default=None, help='worker processes')

	generate = commands.add_parser('generate', help='generate a synthetic dataset')
	common(generate)
	generate.add_argument('--out', required=True, help='dataset directory')
	generate.add_argument('--sections', type=int, default=None, help='number of sections')

	tune = commands.add_parser('tune', help='tune the planner weights')
	common(tune)
	tune.add_argument('--dataset', required=True)
	tune.add_argument('--dcfp', required=True, help='5 comma-separated desired weights')
	tune.add_argument('--split', default='train', choices=['train', 'test', 'all'])
	tune.add_argument('--out', default=None, help='tuning report JSON')
	tune.add_argument('--population', type=int, default=None)
	tune.add_argument('--generations', type=int, default=None)
	tune.add_argument('--mutation', type=float, default=None)
	tune.add_argument('--crossover', type=float, default=None)

	evaluate = commands.add_parser('evaluate', help='compare a CFP with the DCFP baseline')
	common(evaluate)
	evaluate.add_argument('--dataset', required=True)
	evaluate.add_argument('--cfp', required=True, help='5-6 comma-separated values or a tuning report')
	evaluate.add_argument('--dcfp', required=True)
	evaluate.add_argument('--split', default='test', choices=['train', 'test', 'all'])
	evaluate.add_argument('--out', default=None, help='evaluation report JSON')

	trace = commands.add_parser('trace', help='write the closed-loop trace of one section')
	common(trace)
	trace.add_argument('--dataset', required=True)
	trace.add_argument('--section', required=True)
	trace.add_argument('--cfp', required=True)
	trace.add_argument('--dcfp', required=True)
	trace.add_argument('--out', required=True, help='trace CSV')

	experiment = commands.add_parser('experiment', help='run the multi-DCFP experiment')
	common(experiment)
	experiment.add_argument('--dataset', required=True)
	experiment.add_argument('--out', required=True, help='experiment report JSON')
	experiment.add_argument('--sets', type=int, default=None, help='number of DCFP sets')
	return parser
#================================================================================#



#================================================================================#
# Commands ______________________________________________________________________#
#================================================================================#
def _with_overrides(cfg: Config, args: argparse.Namespace) -> Config:
	de = cfg.de
	overrides = {'population_size': getattr(args, 'population', None),
		'max_generations': getattr(args, 'generations', None),
		'mutation': getattr(args, 'mutation', None),
		'crossover': getattr(args, 'crossover', None),
		'parallel_workers': args.workers}
	cfg.de = replace(de, **{k: v for k, v in overrides.items() if v is not None})
	return cfg


#________________________________________________________________________________#
def cmd_generate(args: argparse.Namespace, cfg: Config) -> None:
	generator = cfg.generator
	if args.seed is not None:
		generator = replace(generator, rng_seed=args.seed)
	if args.sections is not None:
		generator = replace(generator, n_sections=args.sections)
	dataset = generate_synthetic_dataset(generator, args.workers or 1)
	save_dataset(dataset, args.out)
	print(dataset.summary())


def cmd_tune(args: argparse.Namespace, cfg: Config) -> None:
	if args.seed is not None:
		cfg.de = replace(cfg.de, rng_seed=args.seed)
	source = DatasetSource(args.dataset, args.split, cfg.split, cfg.simulation)
	study = TuneStudy(parse_dcfp(args.dcfp), cfg.de, cfg.simulation)
	print(TemplatePipeline(source, study, JsonReportWriter(), args.out)().summary)


def cmd_evaluate(args: argparse.Namespace, cfg: Config) -> None:
	source = DatasetSource(args.dataset, args.split, cfg.split, cfg.simulation)
	study = EvaluateStudy(parse_cfp(args.cfp), parse_dcfp(args.dcfp), cfg.simulation)
	print(TemplatePipeline(source, study, JsonReportWriter(), args.out)().summary)


def cmd_trace(args: argparse.Namespace, cfg: Config) -> None:
	source = DatasetSource(args.dataset, 'all', cfg.split, cfg.simulation)
	study = TraceStudy(args.section, parse_cfp(args.cfp), parse_dcfp(args.dcfp), cfg.simulation,
		Path(args.out).name)
	print(TemplatePipeline(source, study, TraceWriter(), args.out)().summary)


def cmd_experiment(args: argparse.Namespace, cfg: Config) -> None:
	if args.seed is not None:
		cfg.experiment = replace(cfg.experiment, rng_seed=args.seed)
	if args.sets is not None:
		cfg.experiment = replace(cfg.experiment, n_dcfp_sets=args.sets)
	source = DatasetSource(args.dataset, 'all', cfg.split, cfg.simulation)
	print(TemplatePipeline(source, ExperimentStudy(cfg), JsonReportWriter(), args.out)().summary)


COMMANDS = {
	'generate': cmd_generate,
	'tune': cmd_tune,
	'evaluate': cmd_evaluate,
	'trace': cmd_trace,
	'experiment': cmd_experiment,
}


#________________________________________________________________________________#
def main(argv: Optional[Sequence[str]] = None) -> int:
	args = build_parser().parse_args(argv)
	try:
		cfg = _with_overrides(read_config(args.config), args)
		COMMANDS[args.command](args, cfg)
	except (InputError, FileNotFoundError, KeyError) as e:
		logging.error(f"{args.command}: {e}")
		print(f"error: {e}", file=sys.stderr)
		return EXIT_INPUT
	except LaneTuneError as e:
		logging.error(f"{args.command}: {type(e).__name__}: {e}")
		print(f"numerical failure: {e}", file=sys.stderr)
		return EXIT_NUMERICAL
	return EXIT_OK


if __name__ == '__main__':
	sys.exit(main())
#================================================================================#
