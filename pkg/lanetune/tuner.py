"""
Upper-level tuner: differential evolution (rand/1/bin, synchronous population)
over the planner weights, scored by the summed simulation cost of a dataset.
"""

import math
import time
import numpy as np
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence
from . import logging
from ._baseclasses import BaseFitness, GENOME_LOWER, GENOME_UPPER
from .checks import generic_check_handler
from .containers import DeConfig, SimulationConfig
from .data import Section
from .exceptions import InputError, LaneTuneError, TuningError
from .planner import CostParams, DesiredCostParams
from .simulator import prepare_section, run_closed_loop

#_____ GLOBALS _____#
_WORKER_FITNESS: Optional[Callable[[np.ndarray], float]] = None



#================================================================================#
#_____ Genome encoding __________________________________________________________#
def decode(genome: Sequence[float]) -> CostParams:
	"""
	Genome [log10 w_d, log10 w_theta, log10 w_kappa, log10 w_kappa_dot, decay]
	to CFP; the input weight is fixed to 1.
	"""
	genome = np.asarray(genome, dtype=float)
	generic_check_handler([
		(genome.shape == GENOME_LOWER.shape, f"Genome must have 5 entries, got {genome.shape}.",
			InputError),
	])
	generic_check_handler([
		(bool(np.all(genome >= GENOME_LOWER) and np.all(genome <= GENOME_UPPER)),
			f"Genome {genome.tolist()} is outside the search box.", InputError),
	])
	weights = tuple(float(w) for w in 10.0 ** genome[:4]) + (1.0,)
	return CostParams(weights, float(genome[4]))


def encode(cfp: CostParams) -> np.ndarray:
	"""Inverse of `decode`; the weights are first normalised by w_u."""
	w = cfp.weights
	return np.append(np.log10(w[:4] / w[4]), cfp.decay)


def seed_genome(dcfp: DesiredCostParams) -> np.ndarray:
	"""The DCFP used as planner weights with decay 1, clamped onto the search box."""
	return np.clip(encode(dcfp.as_cfp()), GENOME_LOWER, GENOME_UPPER)
#================================================================================#



#================================================================================#
#_____ Dataset evaluation _______________________________________________________#
@dataclass
class Evaluation:

	"""
	Summed simulation cost of one CFP over a dataset.

	Attributes:
		total: sum over sections; +inf when any section failed.
		per_section: cost per section id.
		failures: error message per failed section id.
		empty: the dataset had no sections.
	"""

	total: float
	per_section: Dict[str, float] = field(default_factory=dict)
	failures: Dict[str, str] = field(default_factory=dict)
	empty: bool = False

	@property
	def feasible(self) -> bool:
		return not self.failures and math.isfinite(self.total)


#________________________________________________________________________________#
def evaluate_cfp(dataset: Sequence[Section], cfp: CostParams, dcfp: DesiredCostParams,
								sim_cfg: Optional[SimulationConfig] = None) -> Evaluation:
	"""Sum of the simulation costs of every section driven with `cfp`."""
	sections = list(dataset)
	if not sections:
		logging.warning("Evaluating a CFP on an empty dataset, cost is 0.")
		return Evaluation(0.0, empty=True)

	evaluation = Evaluation(0.0)
	for section in sections:
		try:
			result = run_closed_loop(section, cfp, sim_cfg, dcfp)
		except LaneTuneError as e:
			evaluation.failures[section.id] = str(e)
			evaluation.per_section[section.id] = math.inf
			continue
		evaluation.per_section[section.id] = result.total_cost

	if evaluation.failures:
		evaluation.total = math.inf
	else:
		evaluation.total = float(sum(evaluation.per_section.values()))
	return evaluation


#________________________________________________________________________________#
class DatasetFitness(BaseFitness):

	"""
	Fitness of a genome: summed simulation cost of its decoded CFP over the
	sections. Offsets are attached once here, so the tuning loop never projects.
	"""

	def __init__(self, sections: Sequence[Section], dcfp: DesiredCostParams,
							sim_cfg: Optional[SimulationConfig] = None):
		self.sim_cfg  = sim_cfg or SimulationConfig()
		self.dcfp     = dcfp
		if self.sim_cfg.plan_on_truth:
			self.sections = list(sections)
		else:
			self.sections = [s if s.offsets is not None else prepare_section(s, self.sim_cfg)
				for s in sections]

	def evaluate(self, genome: np.ndarray) -> float:
		return evaluate_cfp(self.sections, decode(genome), self.dcfp, self.sim_cfg).total
#================================================================================#



#================================================================================#
#_____ Parallel fitness evaluation ______________________________________________#
def _install_fitness(fitness: Callable[[np.ndarray], float]) -> None:
	global _WORKER_FITNESS
	_WORKER_FITNESS = fitness


def _worker_evaluate(genome: np.ndarray) -> float:
	assert _WORKER_FITNESS is not None
	return _WORKER_FITNESS(genome)


def _as_costs(values: list) -> np.ndarray:
	"""NaN costs lose every comparison."""
	costs = np.array(values, dtype=float)
	costs[np.isnan(costs)] = np.inf
	return costs


#________________________________________________________________________________#
class FitnessPool:

	"""
	Evaluates a batch of genomes, in-process or on a process pool.

	### Parameters:
	- fitness: genome -> cost. Must be picklable when `workers > 1`.
	- workers: number of worker processes; 1 evaluates in-process.

	Results come back in input order, so the outcome does not depend on
	scheduling. Use as a context manager to own the pool:
	>>> with FitnessPool(fitness, workers=4) as pool:
	>>>   costs = pool.map(genomes)
	"""

	map: Callable[[np.ndarray], np.ndarray]

	#______________________________________________________________________________#
	def __init__(self, fitness: Callable[[np.ndarray], float], workers: int = 1):
		self.fitness = fitness
		self.workers = workers
		self.evaluations = 0
		self._executor: Optional[ProcessPoolExecutor] = None
		if workers > 1:
			self.map = self._map_parallel
		else:
			self.map = self._map

	def __enter__(self) -> 'FitnessPool':
		if self.workers > 1:
			self._executor = ProcessPoolExecutor(max_workers=self.workers,
				initializer=_install_fitness, initargs=(self.fitness,))
		return self

	def __exit__(self, *exc) -> None:
		if self._executor is not None:
			self._executor.shutdown()
			self._executor = None

	#______________________________________________________________________________#
	def _map(self, genomes: np.ndarray) -> np.ndarray:
		self.evaluations += len(genomes)
		return _as_costs([self.fitness(g) for g in genomes])

	def _map_parallel(self, genomes: np.ndarray) -> np.ndarray:
		if self._executor is None:
			raise RuntimeError("FitnessPool must be entered before a parallel map.")
		self.evaluations += len(genomes)
		return _as_costs(list(self._executor.map(_worker_evaluate, list(genomes))))
#================================================================================#



#================================================================================#
@dataclass
class TuningResult:

	"""
	Outcome of a tuning run.

	Attributes:
		best_cfp / best_genome / best_cost: the best individual found.
		history: best cost after initialisation and after every generation.
		initial_cost: cost of the DCFP-seeded individual (inf when unseeded).
		evaluations: fitness evaluations performed.
		generations: generations run.
		converged: the population spread fell below `DeConfig.tol`.
		budget_exhausted: the generation budget ran out first.
		infeasible: individuals in the final population with infinite cost.
		wall_time: seconds spent.
	"""

	best_cfp: CostParams
	best_genome: np.ndarray
	best_cost: float
	history: List[float]
	initial_cost: float
	evaluations: int
	generations: int
	converged: bool
	budget_exhausted: bool
	infeasible: int
	wall_time: float = 0.0

	def to_dict(self) -> dict:
		return {
			'best_cfp': self.best_cfp.to_dict(),
			'best_genome': self.best_genome.tolist(),
			'best_cost': self.best_cost,
			'history': list(self.history),
			'initial_cost': self.initial_cost if math.isfinite(self.initial_cost) else None,
			'evaluations': self.evaluations,
			'generations': self.generations,
			'converged': self.converged,
			'budget_exhausted': self.budget_exhausted,
			'infeasible': self.infeasible,
			'wall_time': self.wall_time,
		}


#________________________________________________________________________________#
def _parents(rng: np.random.Generator, i: int, size: int) -> np.ndarray:
	"""Three distinct population indices, all different from i."""
	picks = rng.choice(size - 1, 3, replace=False)
	picks[picks >= i] += 1
	return picks


#________________________________________________________________________________#
def tune(train: Sequence[Section], dcfp: Optional[DesiredCostParams],
				de: Optional[DeConfig] = None, sim_cfg: Optional[SimulationConfig] = None,
				fitness: Optional[Callable[[np.ndarray], float]] = None) -> TuningResult:
	"""
	Tune the planner weights on the training sections.

	### Parameters:
	- train: training sections (nonempty unless a `fitness` is supplied).
	- dcfp: desired weights of the simulation cost. One individual is seeded with
		them (decay 1); the rest are uniform in the search box.
	- de: differential evolution settings.
	- sim_cfg: closed-loop settings.
	- fitness: genome -> cost override; replaces the dataset fitness.

	### Raises:
	- TuningError: every individual of the initial population is infeasible.
	"""
	de = de or DeConfig()
	started = time.perf_counter()
	if fitness is None:
		generic_check_handler([
			(len(train) > 0, "Tuning needs a nonempty training set.", InputError),
			(dcfp is not None, "Tuning on a dataset needs a DCFP.", InputError),
		])
		fitness = DatasetFitness(train, dcfp, sim_cfg) # type: ignore[arg-type]

	rng = np.random.default_rng(de.rng_seed)
	size, dim = de.population_size, GENOME_LOWER.size
	span = GENOME_UPPER - GENOME_LOWER
	population = GENOME_LOWER + rng.random((size, dim)) * span
	if dcfp is not None:
		population[0] = seed_genome(dcfp)

	converged = False
	generation = 0
	with FitnessPool(fitness, de.parallel_workers) as pool:
		costs = pool.map(population)
		if not np.any(np.isfinite(costs)):
			raise TuningError(f"All {size} initial individuals are infeasible.")
		initial_cost = float(costs[0]) if dcfp is not None else math.inf
		history = [float(costs.min())]
		logging.info(f"DE initialised: best {history[0]:.6g}, seeded {initial_cost:.6g}, "
			f"{int(np.sum(~np.isfinite(costs)))} infeasible")

		for generation in range(1, de.max_generations + 1):
			trials = np.empty_like(population)
			for i in range(size):
				r0, r1, r2 = _parents(rng, i, size)
				mutant = np.clip(population[r0] + de.mutation * (population[r1] - population[r2]),
					GENOME_LOWER, GENOME_UPPER)
				cross = rng.random(dim) < de.crossover
				cross[rng.integers(dim)] = True
				trials[i] = np.where(cross, mutant, population[i])

			trial_costs = pool.map(trials)
			better = trial_costs <= costs
			population[better] = trials[better]
			costs[better] = trial_costs[better]
			history.append(float(costs.min()))
			logging.info(f"DE generation {generation}/{de.max_generations}: best {history[-1]:.6g}")

			finite = costs[np.isfinite(costs)]
			if de.tol > 0 and finite.size == size and np.std(finite) <= de.tol * abs(np.mean(finite)):
				converged = True
				break
		evaluations = pool.evaluations

	best = int(np.argmin(costs))
	budget_exhausted = not converged
	if budget_exhausted and de.tol > 0:
		logging.warning(f"DE budget of {de.max_generations} generations exhausted before convergence.")
	infeasible = int(np.sum(~np.isfinite(costs)))
	if infeasible:
		logging.warning(f"{infeasible} individual(s) of the final population are infeasible.")

	return TuningResult(
		best_cfp=decode(population[best]),
		best_genome=population[best].copy(),
		best_cost=float(costs[best]),
		history=history,
		initial_cost=initial_cost,
		evaluations=evaluations,
		generations=generation,
		converged=converged,
		budget_exhausted=budget_exhausted,
		infeasible=infeasible,
		wall_time=time.perf_counter() - started)
#================================================================================#
