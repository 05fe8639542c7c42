"""Exceptions raised by the lanetune package."""

from typing import Optional
import numpy as np



#================================================================================#
class LaneTuneError(Exception):
	"""Base class for every lanetune error."""


class InputError(LaneTuneError, ValueError):
	"""A precondition on the inputs (arguments, configs, files) does not hold."""


class OutOfRangeError(InputError):
	"""A curve was queried outside its arc-length range."""


class ProjectionError(LaneTuneError):
	"""A point could not be projected onto a curve."""


class AmbiguousProjectionError(ProjectionError):
	"""Several equidistant foot points exist for the projected point."""
#================================================================================#



#================================================================================#
class NumericalError(LaneTuneError):
	"""Base class for numerical failures (exit code 3 on the command line)."""


class NotPositiveDefiniteError(NumericalError):
	"""The QP Hessian failed its Cholesky factorisation."""


class NonConvergenceError(NumericalError):
	"""
	The QP solver hit its iteration cap with the KKT residual above tolerance.

	Attributes:
		best: the best iterate found (feasible).
		residual: KKT residual of `best`.
		iterations: number of iterations performed.
	"""

	def __init__(self, msg: str, best: np.ndarray, residual: float, iterations: int):
		super().__init__(msg)
		self.best       = best
		self.residual   = residual
		self.iterations = iterations


class SimulationError(NumericalError):
	"""The closed loop failed at `step` of section `section_id`."""

	def __init__(self, msg: str, section_id: str = '', step: Optional[int] = None):
		super().__init__(msg)
		self.section_id = section_id
		self.step       = step


class TuningError(NumericalError):
	"""The tuner could not produce a single feasible individual."""
#================================================================================#
