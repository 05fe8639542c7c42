"""
Base classes for lanetune.
"""

import math
import numpy as np
from abc import ABC, abstractmethod
from pathlib import Path
from . import logging
from .checks import generic_check_handler
from .containers import Report
from .exceptions import InputError

#_____ GLOBALS _____#
GENOME_LOWER = np.array([-8.0, -8.0, -8.0, -8.0, 0.5])
GENOME_UPPER = np.array([ 8.0,  8.0,  8.0,  8.0, 1.0])



#================================================================================#
#_____ Base class for the fitness function ______________________________________#
class BaseFitness(ABC):

	"""
	Base class for the tuner's fitness function.

	Abstract methods:
	- evaluate: cost of one genome. Defined in the child class.

	Notes:
	- This class also contains a __call__ method, which checks the genome against
		the search box before evaluating it, and maps any non-finite cost to +inf so
		the individual loses every comparison. This means it can be used as a
		function, e.g.: \n
		>>> fitness = DatasetFitness(train, dcfp, sim_cfg) \n
		>>> cost = fitness(genome)
	"""

	@abstractmethod
	def evaluate(self, genome: np.ndarray) -> float:
		"""
		Cost of the genome.
		"""
		pass

	def __call__(self, genome: np.ndarray) -> float:
		genome = np.asarray(genome, dtype=float)
		generic_check_handler([
			(genome.shape == GENOME_LOWER.shape, f"Genome must have 5 entries, got {genome.shape}.",
				InputError),
		])
		generic_check_handler([
			(bool(np.all(genome >= GENOME_LOWER) and np.all(genome <= GENOME_UPPER)),
				f"Genome {genome.tolist()} is outside the search box.", InputError),
		])
		cost = float(self.evaluate(genome))
		if not math.isfinite(cost):
			return math.inf
		return cost
#================================================================================#



#================================================================================#
#_____ Base class for the report writers ________________________________________#
class BaseReport(ABC):

	"""
	Base class for the report writers.

	Abstract methods:
	- write: writes the report to the output path. Defined in the child class.

	Notes:
	- This class also contains a __call__ method, which runs some checks to ensure
		the report conforms to expectations. It then calls the write function.
	"""

	@abstractmethod
	def write(self, report: Report, out: Path) -> None:
		"""
		Write the report.
		"""
		pass

	def __call__(self, report: Report, out: str | Path) -> None:
		"""
		Write the report.
		"""
		generic_check_handler([
			(isinstance(report, Report), f"Expected a Report, got {type(report)}", TypeError),
			(str(out) != '', "Output path cannot be empty.", InputError),
		])

		# An empty report writes nothing
		if not report.document and report.table is None:
			logging.warning(f"Report '{report.name}' is empty, not writing anything.")
			return None

		out = Path(out)
		out.parent.mkdir(parents=True, exist_ok=True)
		self.write(report, out)
		logging.info(f"Wrote {report.name} report to {out}")
#================================================================================#
