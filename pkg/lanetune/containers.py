"""
Configuration dataclasses for the simulation, tuning and data-generation stages.
"""

import os
import dotenv
from dataclasses import dataclass, field, fields, is_dataclass, asdict
from typing import Any, Optional, Tuple
from pandas import DataFrame
from . import logging
from .checks import generic_check_handler
from .exceptions import InputError

#_____ GLOBALS _____#
dotenv.load_dotenv()
WORKERS = int(os.getenv('LANETUNE_WORKERS', '1'))
NESTED_SECTIONS = {'noise': 'generator', 'road': 'generator', 'planner': 'simulation', 'qp': 'simulation'}



#================================================================================#
#_____ Shared printing / dict helpers ___________________________________________#
class _Printable:

	def __str__(self):
		output = ''
		for attr in self.__dict__:
			if not attr.startswith('_'):
				output += f"{attr}: {self.__dict__[attr]}\n"
		return output

	def to_dict(self) -> dict:
		return asdict(self) # type: ignore[call-overload]
#================================================================================#



#================================================================================#
#_____ Solver / planner / simulation ____________________________________________#
@dataclass
class QpConfig(_Printable):

	"""
	Box-QP solver settings.

	Attributes:
		tol_kkt: projected-gradient KKT residual tolerance.
		max_iter: iteration cap.
		armijo: sufficient-decrease constant of the projected line search.
		max_backtracks: halvings tried before falling back to a gradient step.
	"""

	tol_kkt: float = 1e-9
	max_iter: int = 10_000
	armijo: float = 1e-4
	max_backtracks: int = 40

	def __post_init__(self):
		generic_check_handler([
			(self.tol_kkt > 0, f"tol_kkt must be positive, got {self.tol_kkt}", InputError),
			(self.max_iter >= 1, f"max_iter must be >= 1, got {self.max_iter}", InputError),
			(0 < self.armijo < 1, f"armijo must lie in (0, 1), got {self.armijo}", InputError),
		])


#________________________________________________________________________________#
@dataclass
class PlannerConfig(_Printable):

	"""
	MPC planner settings.

	Attributes:
		horizon: planning steps N.
		u_min, u_max: bounds on the curvature second derivative, 1/(m s^2).
		horizon_velocity: 'profile' reads the recorded speeds over the horizon (holding
			the last value past the end of the section), 'constant' holds v_j.
	"""

	horizon: int = 30
	u_min: float = -0.02
	u_max: float = 0.02
	horizon_velocity: str = 'profile'

	def __post_init__(self):
		generic_check_handler([
			(self.horizon >= 1, f"horizon must be >= 1, got {self.horizon}", InputError),
			(self.u_min < self.u_max, "u_min must be below u_max", InputError),
			(self.horizon_velocity in ('profile', 'constant'),
				f"horizon_velocity must be 'profile' or 'constant', got {self.horizon_velocity}",
				InputError),
		])


#________________________________________________________________________________#
@dataclass
class SimulationConfig(_Printable):

	"""
	Closed-loop simulation settings.

	Attributes:
		planner / qp: nested planner and solver configs.
		warm_start: seed each QP with the previous solution shifted by one step.
		plan_on_truth: plan against the true curve with a zero reference offset.
		corridor: maximum projection distance onto an estimated curve, m.
		offset_envelope: max |d| regression envelope, m.
	"""

	planner: PlannerConfig = field(default_factory=PlannerConfig)
	qp: QpConfig = field(default_factory=QpConfig)
	warm_start: bool = True
	plan_on_truth: bool = False
	corridor: float = 20.0
	offset_envelope: float = 1.0

	def __post_init__(self):
		if isinstance(self.planner, dict):
			self.planner = PlannerConfig(**self.planner)
		if isinstance(self.qp, dict):
			self.qp = QpConfig(**self.qp)
		generic_check_handler([
			(self.corridor > 0, "corridor must be positive", InputError),
			(self.offset_envelope > 0, "offset_envelope must be positive", InputError),
		])
#================================================================================#



#================================================================================#
#_____ Tuner ____________________________________________________________________#
@dataclass
class DeConfig(_Printable):

	"""
	Differential evolution (rand/1/bin) settings.

	Attributes:
		population_size: individuals per generation.
		mutation: differential weight F.
		crossover: crossover probability CR.
		max_generations: generation budget.
		rng_seed: seed of the population / mutation stream.
		parallel_workers: fitness worker processes (1 evaluates in-process).
		tol: relative population-spread stop criterion; 0 runs the whole budget.

	Notes:
		- The default worker count comes from the `LANETUNE_WORKERS` env variable.
	"""

	population_size: int = 50
	mutation: float = 0.8
	crossover: float = 0.9
	max_generations: int = 150
	rng_seed: int = 0
	parallel_workers: int = WORKERS
	tol: float = 0.0

	def __post_init__(self):
		generic_check_handler([
			(self.population_size >= 4, "population_size must be >= 4", InputError),
			(0 < self.mutation <= 2, "mutation F must lie in (0, 2]", InputError),
			(0 <= self.crossover <= 1, "crossover CR must lie in [0, 1]", InputError),
			(self.max_generations >= 0, "max_generations must be >= 0", InputError),
			(self.parallel_workers >= 1, "parallel_workers must be >= 1", InputError),
			(self.tol >= 0, "tol must be >= 0", InputError),
		])
#================================================================================#



#================================================================================#
#_____ Data generation __________________________________________________________#
@dataclass
class NoiseConfig(_Printable):

	"""
	Perception-error model of the synthetic estimated lane centre.

	Attributes:
		lateral_sigma: stationary std of the lateral offset error, m.
		heading_sigma: stationary std of the heading error, rad.
		correlation_time: OU time constant of all error components, s.
		correlation_length: along-curve length scale of the curvature error, m.
		lookahead: forward extent of each estimate, m.
		back_margin: extent of each estimate behind the vehicle, m.
		rng_seed: seed of the noise stream.
	"""

	lateral_sigma: float = 0.15
	heading_sigma: float = 0.004
	correlation_time: float = 1.5
	correlation_length: float = 60.0
	lookahead: float = 120.0
	back_margin: float = 5.0
	rng_seed: int = 0

	def __post_init__(self):
		generic_check_handler([
			(self.lateral_sigma >= 0, "lateral_sigma must be >= 0", InputError),
			(self.heading_sigma >= 0, "heading_sigma must be >= 0", InputError),
			(self.correlation_time > 0, "correlation_time must be positive", InputError),
			(self.correlation_length > 0, "correlation_length must be positive", InputError),
			(self.lookahead > 0, "lookahead must be positive", InputError),
			(self.back_margin > 0, "back_margin must be positive", InputError),
		])


#________________________________________________________________________________#
@dataclass
class RoadConfig(_Printable):

	"""
	Synthetic road layout: straights and arcs joined by clothoid transitions.

	Attributes:
		node_spacing: arc-length grid spacing of generated curves, m (<= 1).
		min_radius: tightest arc radius, m.
		straight_probability: chance that a constant-curvature piece is a straight.
		segment_length: (min, max) length of constant-curvature pieces, m.
		transition_length: (min, max) length of clothoid transitions, m.
	"""

	node_spacing: float = 1.0
	min_radius: float = 250.0
	straight_probability: float = 0.35
	segment_length: Tuple[float, float] = (60.0, 250.0)
	transition_length: Tuple[float, float] = (20.0, 80.0)

	def __post_init__(self):
		self.segment_length    = tuple(self.segment_length)    # type: ignore[assignment]
		self.transition_length = tuple(self.transition_length) # type: ignore[assignment]
		generic_check_handler([
			(0 < self.node_spacing <= 1.0, "node_spacing must lie in (0, 1] m", InputError),
			(self.min_radius > 0, "min_radius must be positive", InputError),
			(0 <= self.straight_probability <= 1, "straight_probability must lie in [0, 1]",
				InputError),
			(0 < self.segment_length[0] <= self.segment_length[1],
				"segment_length must be an increasing positive range", InputError),
			(0 < self.transition_length[0] <= self.transition_length[1],
				"transition_length must be an increasing positive range", InputError),
		])


#________________________________________________________________________________#
@dataclass
class GeneratorConfig(_Printable):

	"""
	Synthetic dataset generation.

	Attributes:
		n_sections: number of continuous sections.
		duration: (min, max) section duration, s (the recorded data spans 6-60 s).
		speed: (min, max) speed, m/s (40-100 km/h by default).
		sample_time: simulation step Ts, s.
		rng_seed: seed of roads and speed profiles; section seeds derive from it.
		noise / road: nested configs.
	"""

	n_sections: int = 13
	duration: Tuple[float, float] = (20.0, 40.0)
	speed: Tuple[float, float] = (40 / 3.6, 100 / 3.6)
	sample_time: float = 0.1
	rng_seed: int = 0
	noise: NoiseConfig = field(default_factory=NoiseConfig)
	road: RoadConfig = field(default_factory=RoadConfig)

	def __post_init__(self):
		if isinstance(self.noise, dict):
			self.noise = NoiseConfig(**self.noise)
		if isinstance(self.road, dict):
			self.road = RoadConfig(**self.road)
		self.duration = tuple(self.duration) # type: ignore[assignment]
		self.speed    = tuple(self.speed)    # type: ignore[assignment]
		generic_check_handler([
			(self.n_sections >= 1, "n_sections must be >= 1", InputError),
			(0 < self.duration[0] <= self.duration[1], "duration must be an increasing positive range",
				InputError),
			(0 < self.speed[0] <= self.speed[1], "speed must be an increasing positive range",
				InputError),
			(self.sample_time > 0, "sample_time must be positive", InputError),
			(self.duration[0] >= 2 * self.sample_time, "sections need at least two steps", InputError),
		])
#================================================================================#



#================================================================================#
#_____ Experiment _______________________________________________________________#
@dataclass
class SplitConfig(_Printable):
	"""Train/test split settings."""

	test_fraction: float = 0.142
	rng_seed: int = 0

	def __post_init__(self):
		generic_check_handler([
			(0 < self.test_fraction < 1, "test_fraction must lie in (0, 1)", InputError),
		])


#________________________________________________________________________________#
@dataclass
class ExperimentConfig(_Printable):

	"""
	Multi-DCFP experiment settings.

	Attributes:
		n_dcfp_sets: number of random desired-cost sets.
		factor_range: (low, high) bounds of the log-uniform factors on the neutral set.
		rng_seed: seed of the factor draws; the tuner seed of set i is `rng_seed + i`.
		pilot_cfps: hand-set CFPs (5 weights + decay) used to calibrate the neutral set.
	"""

	n_dcfp_sets: int = 10
	factor_range: Tuple[float, float] = (0.25, 4.0)
	rng_seed: int = 0
	pilot_cfps: Tuple[Tuple[float, ...], ...] = (
		(1.0e1, 1.0e4, 1.0e6, 1.0e5, 1.0e4, 1.0),
		(3.0e1, 3.0e3, 3.0e5, 1.0e5, 1.0e4, 1.0),
		(1.0e1, 3.0e4, 3.0e6, 3.0e5, 3.0e4, 1.0),
		(5.0e0, 1.0e4, 1.0e6, 3.0e4, 3.0e3, 0.98),
	)

	def __post_init__(self):
		self.factor_range = tuple(self.factor_range) # type: ignore[assignment]
		self.pilot_cfps   = tuple(tuple(p) for p in self.pilot_cfps)
		generic_check_handler([
			(self.n_dcfp_sets >= 1, "n_dcfp_sets must be >= 1", InputError),
			(0 < self.factor_range[0] <= self.factor_range[1],
				"factor_range must be an increasing positive range", InputError),
			(len(self.pilot_cfps) >= 1, "at least one pilot CFP is required", InputError),
			(all(len(p) == 6 for p in self.pilot_cfps),
				"pilot CFPs need 5 weights and a decay", InputError),
		])
#================================================================================#



#================================================================================#
#_____ Aggregate config _________________________________________________________#
@dataclass
class Config(_Printable):

	"""
	Aggregate configuration, as read from a JSON / TOML config file.

	Atributes:
		generator: synthetic dataset generation (includes `noise` and `road`).
		simulation: closed loop (includes `planner` and `qp`).
		de: differential evolution.
		split: train/test split.
		experiment: multi-DCFP experiment.

	Notes:
		- Unknown keys are rejected so typos do not pass silently.
		- `noise`, `road`, `planner` and `qp` may also be given as top-level sections.
	"""

	generator: GeneratorConfig = field(default_factory=GeneratorConfig)
	simulation: SimulationConfig = field(default_factory=SimulationConfig)
	de: DeConfig = field(default_factory=DeConfig)
	split: SplitConfig = field(default_factory=SplitConfig)
	experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

	#______________________________________________________________________________#
	@classmethod
	def from_dict(cls, raw: dict) -> 'Config':
		raw = {key: dict(value) if isinstance(value, dict) else value for key, value in raw.items()}
		for key, parent in NESTED_SECTIONS.items():
			if key in raw:
				raw.setdefault(parent, {})[key] = raw.pop(key)

		known = {f.name: f for f in fields(cls)}
		unknown = sorted(set(raw) - set(known))
		if unknown:
			raise InputError(f"Unknown config section(s): {', '.join(unknown)}")

		kwargs: dict[str, Any] = {}
		for name, value in raw.items():
			if not isinstance(value, dict):
				raise InputError(f"Config section '{name}' must be a table/object.")
			section_cls = known[name].default_factory # type: ignore[misc]
			try:
				kwargs[name] = section_cls(**value)   # type: ignore[operator]
			except TypeError as e:
				raise InputError(f"Bad keys in config section '{name}': {e}") from e
		config = cls(**kwargs)
		logging.info(f"Loaded config sections: {', '.join(sorted(raw)) or '(defaults)'}")
		return config

	#______________________________________________________________________________#
	def to_dict(self) -> dict:
		return {f.name: asdict(getattr(self, f.name)) for f in fields(self)
			if is_dataclass(getattr(self, f.name))}
#================================================================================#



#================================================================================#
@dataclass(repr=True)
class Report:

	"""
	Dataclass to hold a study's output, e.g.:
	>>> report = Report(name='tuning', document={...}, table=df, summary='...')

	Attributes:
		name: short report name used in log lines.
		document: JSON-serialisable payload.
		table: optional tabular view, written as CSV next to the document.
		summary: human-readable text printed by the command line.
	"""

	name: str
	document: dict = field(default_factory=dict)
	table: Optional[DataFrame] = None
	summary: str = ''

	#______________________________________________________________________________#
	def __str__(self):
		output = f'Report object: {self.name}'
		for key, value in self.document.items():
			output += f"\n--- {key}: [{value.__class__.__name__}]"
		if self.table is not None:
			output += f"\n--- table:\n{self.table.head(5)}"
		return output
#================================================================================#
