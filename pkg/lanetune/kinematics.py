"""
Linearised, discretised lateral kinematics relative to a reference curve.

State x = [d, theta, kappa, kappa_dot], input u = second derivative of the
curvature, disturbance z = reference heading.
"""

import math
import numpy as np
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence
from .checks import generic_check_handler
from .exceptions import InputError



#================================================================================#
@dataclass(frozen=True)
class LateralState:

	"""
	Lateral vehicle state relative to a reference curve.

	Attributes:
		d: lateral offset, m (left positive).
		theta: vehicle heading, rad.
		kappa: driven curvature, 1/m.
		kappa_dot: curvature rate, 1/(m s).
	"""

	d: float = 0.0
	theta: float = 0.0
	kappa: float = 0.0
	kappa_dot: float = 0.0

	def __post_init__(self):
		if not all(math.isfinite(v) for v in (self.d, self.theta, self.kappa, self.kappa_dot)):
			raise InputError(f"LateralState fields must be finite, got {self}.")

	def to_array(self) -> np.ndarray:
		return np.array([self.d, self.theta, self.kappa, self.kappa_dot], dtype=float)

	@classmethod
	def from_array(cls, x: Sequence[float]) -> 'LateralState':
		values = np.asarray(x, dtype=float)
		if values.shape != (4,):
			raise InputError(f"A lateral state has 4 entries, got shape {values.shape}.")
		return cls(*(float(v) for v in values))


#________________________________________________________________________________#
@dataclass(frozen=True)
class SystemMatrices:
	"""A (4x4), B (4,) and E (4,) of x+ = A x + B u + E z. Arrays are read-only."""
	A: np.ndarray
	B: np.ndarray
	E: np.ndarray
#================================================================================#



#================================================================================#
@lru_cache(maxsize=8192)
def _cached_matrices(v: float, Ts: float) -> SystemMatrices:
	vT = v * Ts
	A = np.array([
		[1.0, vT,  0.5 * v * v * Ts ** 2, v * v * Ts ** 3 / 6.0],
		[0.0, 1.0, vT,                    0.5 * v * Ts ** 2],
		[0.0, 0.0, 1.0,                   Ts],
		[0.0, 0.0, 0.0,                   1.0],
	])
	B = np.array([v * v * Ts ** 4 / 24.0, v * Ts ** 3 / 6.0, 0.5 * Ts ** 2, Ts])
	E = np.array([-vT, 0.0, 0.0, 0.0])
	for array in (A, B, E):
		array.setflags(write=False)
	return SystemMatrices(A, B, E)


def system_matrices(v: float, Ts: float) -> SystemMatrices:
	"""
	Discrete system matrices at speed v (m/s) and sample time Ts (s).

	The speed is held constant over the step.
	"""
	v, Ts = float(v), float(Ts)
	generic_check_handler([
		(math.isfinite(v) and v >= 0, f"Speed must be finite and >= 0, got {v}.", InputError),
		(math.isfinite(Ts) and Ts > 0, f"Sample time must be finite and > 0, got {Ts}.", InputError),
	])
	return _cached_matrices(v, Ts)


#________________________________________________________________________________#
def propagate(x: np.ndarray, u: float, z: float, matrices: SystemMatrices) -> np.ndarray:
	"""Array form of one step: A x + B u + E z."""
	return matrices.A @ x + matrices.B * u + matrices.E * z


def step(x: LateralState, u: float, z: float, v: float, Ts: float) -> LateralState:
	"""
	Propagate the state by one sample.

	### Parameters:
	- x: current state.
	- u: curvature second derivative, 1/(m s^2).
	- z: reference heading (disturbance), rad.
	- v, Ts: speed and sample time of the step.

	No heading wrap is applied; the model is only valid for small relative angles.
	"""
	if not (math.isfinite(u) and math.isfinite(z)):
		raise InputError(f"Input and disturbance must be finite, got u={u}, z={z}.")
	return LateralState.from_array(propagate(x.to_array(), u, z, system_matrices(v, Ts)))
#================================================================================#
