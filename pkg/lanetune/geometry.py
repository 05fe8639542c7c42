"""
Arc-length parametrised planar curves (lane centres) with frame and projection
queries.
"""

import math
import numpy as np
from dataclasses import dataclass
from typing import Sequence, Tuple
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.integrate import cumulative_trapezoid
from .checks import generic_check_handler
from .exceptions import (InputError, OutOfRangeError, ProjectionError,
	AmbiguousProjectionError)

#_____ GLOBALS _____#
RANGE_EPS      = 1e-9   # slack on arc-length range checks, m
ORTHO_TOL      = 1e-9   # foot-point orthogonality tolerance, m
TIE_TOL        = 1e-9   # floor of the equidistance tolerance between foot points, m
MAX_CANDIDATES = 8      # local minima refined per projection
NODE_COLUMNS   = ('s', 'x', 'y', 'theta', 'kappa', 'kappa_dot')



#================================================================================#
def wrap_angle(angle):
	"""Wrap an angle (or array of angles) to (-pi, pi]."""
	return math.pi - np.mod(math.pi - np.asarray(angle, dtype=float), 2 * math.pi)


#________________________________________________________________________________#
@dataclass(frozen=True)
class CurveFrame:
	"""Reference-curve quantities at one arc length."""
	point: Tuple[float, float]
	theta_r: float
	kappa_r: float
	kappa_dot_r: float
#================================================================================#



#================================================================================#
class Curve:

	"""
	Sampled planar curve with interpolation tables.

	Position and heading are cubic-spline interpolated, curvature and curvature
	rate are linearly interpolated. The heading is stored unwrapped so it is
	continuous along the curve; `sample_at` reports it wrapped.

	Build instances with `build_curve`, which validates the nodes.
	"""

	def __init__(self, nodes: np.ndarray):
		self._nodes = np.array(nodes, dtype=float)
		self._nodes.setflags(write=False)
		s = self._nodes[:, 0]
		self._xy    = CubicSpline(s, self._nodes[:, 1:3], axis=0)
		self._theta = CubicSpline(s, self._nodes[:, 3])

	#______________________________________________________________________________#
	@property
	def nodes(self) -> np.ndarray:
		"""(n, 6) node table: s, x, y, theta (unwrapped), kappa, kappa_dot."""
		return self._nodes

	@property
	def s(self) -> np.ndarray:
		return self._nodes[:, 0]

	@property
	def s_min(self) -> float:
		return float(self._nodes[0, 0])

	@property
	def s_max(self) -> float:
		return float(self._nodes[-1, 0])

	def __len__(self) -> int:
		return self._nodes.shape[0]

	def __eq__(self, other) -> bool:
		return isinstance(other, Curve) and np.array_equal(self._nodes, other._nodes)

	def __repr__(self) -> str:
		return f"Curve(nodes={len(self)}, s=[{self.s_min:.3f}, {self.s_max:.3f}])"

	#______________________________________________________________________________#
	def _checked(self, s):
		s = np.asarray(s, dtype=float)
		lo, hi = self.s_min, self.s_max
		if np.any(~np.isfinite(s)) or np.any(s < lo - RANGE_EPS) or np.any(s > hi + RANGE_EPS):
			bad = s[(~np.isfinite(s)) | (s < lo - RANGE_EPS) | (s > hi + RANGE_EPS)]
			raise OutOfRangeError(
				f"Arc length {np.ravel(bad)[0]!r} outside curve range [{lo}, {hi}].")
		return np.clip(s, lo, hi)

	def point(self, s) -> np.ndarray:
		"""Cartesian point(s) at arc length s: shape (2,) or (n, 2)."""
		return self._xy(self._checked(s))

	def tangent(self, s) -> np.ndarray:
		"""Derivative of the position spline (unnormalised tangent)."""
		return self._xy(self._checked(s), 1)

	def heading(self, s):
		"""Unwrapped heading, rad."""
		return self._theta(self._checked(s))

	def curvature(self, s):
		return np.interp(self._checked(s), self.s, self._nodes[:, 4])

	def curvature_rate(self, s):
		return np.interp(self._checked(s), self.s, self._nodes[:, 5])

	def frames(self, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
		"""Vectorised (point, unwrapped heading, curvature, curvature rate) at s."""
		s = self._checked(s)
		return (self._xy(s), self._theta(s),
			np.interp(s, self.s, self._nodes[:, 4]),
			np.interp(s, self.s, self._nodes[:, 5]))

	#______________________________________________________________________________#
	def __getstate__(self):
		return {'nodes': np.array(self._nodes)}

	def __setstate__(self, state):
		self.__init__(state['nodes'])
#================================================================================#



#================================================================================#
def build_curve(nodes: Sequence[Sequence[float]] | np.ndarray) -> Curve:
	"""
	Build a curve from nodes `(s, x, y, theta, kappa, kappa_dot)`.

	The heading is unwrapped; adjacent headings must then differ by less than pi/2.
	"""
	table = np.asarray(nodes, dtype=float)
	if table.ndim != 2 or table.shape[1] != 6:
		raise InputError(f"Curve nodes must be an (n, 6) table, got shape {table.shape}.")

	finite = bool(np.all(np.isfinite(table)))
	generic_check_handler([
		(table.shape[0] >= 2, f"A curve needs at least 2 nodes, got {table.shape[0]}.", InputError),
		(finite, "Curve nodes contain non-finite values.", InputError),
	])
	s = table[:, 0]
	generic_check_handler([
		(bool(np.all(np.diff(s) > 0)), "Curve arc lengths must be strictly increasing.", InputError),
	])

	table = table.copy()
	table[:, 3] = np.unwrap(table[:, 3])
	generic_check_handler([
		(bool(np.all(np.abs(np.diff(table[:, 3])) < math.pi / 2)),
			"Adjacent curve headings differ by pi/2 or more.", InputError),
	])
	return Curve(table)


#________________________________________________________________________________#
def sample_at(curve: Curve, s: float) -> CurveFrame:
	"""Interpolated reference frame at arc length s (heading wrapped to (-pi, pi])."""
	point, theta, kappa, kappa_dot = curve.frames(s)
	return CurveFrame(point=(float(point[0]), float(point[1])),
		theta_r=float(wrap_angle(theta)),
		kappa_r=float(kappa),
		kappa_dot_r=float(kappa_dot))
#================================================================================#



#================================================================================#
#_____ Projection _______________________________________________________________#
def _refine_foot(curve: Curve, p: np.ndarray, lo: float, hi: float) -> float:
	"""Local minimiser of |c(s) - p|^2 on [lo, hi], polished by Newton steps."""
	spline = curve._xy
	res = minimize_scalar(lambda s: float(np.sum((spline(s) - p) ** 2)),
		bounds=(lo, hi), method='bounded', options={'xatol': 1e-10})
	s = float(res.x)

	# Newton on g(s) = (c(s) - p) . c'(s)
	for _ in range(25):
		diff = spline(s) - p
		d1   = spline(s, 1)
		d2   = spline(s, 2)
		slope = float(d1 @ d1 + diff @ d2)
		if slope <= 0:
			break
		s_new = min(max(s - float(diff @ d1) / slope, lo), hi)
		if abs(s_new - s) < 1e-14:
			s = s_new
			break
		s = s_new
	return s


#________________________________________________________________________________#
def project_point(curve: Curve, p: Sequence[float], corridor: float = 20.0) -> Tuple[float, float]:
	"""
	Project a point onto the curve.

	### Returns:
	- s_star: arc length of the foot point.
	- d_signed: distance to the foot point, positive when p is left of the tangent.

	### Raises:
	- ProjectionError: no orthogonal foot point within `corridor`.
	- AmbiguousProjectionError: several equidistant foot points.
	"""
	p = np.asarray(p, dtype=float)
	if p.shape != (2,) or not np.all(np.isfinite(p)):
		raise InputError(f"Projected point must be a finite 2-vector, got {p!r}.")

	nodes = curve.nodes
	s     = nodes[:, 0]
	d2    = np.sum((nodes[:, 1:3] - p) ** 2, axis=1)
	n     = len(s)

	# Coarse scan: node-level local minima near the corridor
	left  = np.concatenate(([np.inf], d2[:-1]))
	right = np.concatenate((d2[1:], [np.inf]))
	minima = np.flatnonzero((d2 <= left) & (d2 <= right))
	spacing = float(np.max(np.diff(s)))
	minima = minima[np.sqrt(d2[minima]) <= corridor + 2 * spacing]
	if minima.size == 0:
		raise ProjectionError(f"No curve node within the {corridor} m corridor of {tuple(p)}.")
	minima = minima[np.argsort(d2[minima], kind='stable')][:MAX_CANDIDATES]

	feet = []
	for i in minima:
		lo, hi = s[max(i - 1, 0)], s[min(i + 1, n - 1)]
		s_star = _refine_foot(curve, p, lo, hi)
		feet.append((float(np.linalg.norm(curve._xy(s_star) - p)), s_star))
	feet.sort()
	dist, s_star = feet[0]

	# Spline position error grows like h^4 |kappa|^3; ties are judged at that scale
	kappa_max = float(np.max(np.abs(nodes[:, 4])))
	tie_tol = TIE_TOL + spacing ** 4 * kappa_max ** 3
	for other_dist, other_s in feet[1:]:
		if abs(other_dist - dist) <= tie_tol and abs(other_s - s_star) > 2 * spacing:
			raise AmbiguousProjectionError(
				f"Point {tuple(p)} has equidistant foot points at s={s_star} and s={other_s}.")

	foot    = curve._xy(s_star)
	tangent = curve._xy(s_star, 1)
	tangent = tangent / np.linalg.norm(tangent)
	diff    = p - foot
	if abs(float(diff @ tangent)) > ORTHO_TOL:
		raise ProjectionError(
			f"No orthogonal projection of {tuple(p)} inside [{curve.s_min}, {curve.s_max}].")
	if dist > corridor:
		raise ProjectionError(f"Point {tuple(p)} is {dist:.3f} m from the curve (corridor {corridor} m).")

	cross = tangent[0] * diff[1] - tangent[1] * diff[0]
	return s_star, float(math.copysign(dist, cross))
#================================================================================#



#================================================================================#
#_____ Constructors used by tests and the synthetic generator ___________________#
def curve_from_curvature(s: np.ndarray, kappa: np.ndarray, kappa_dot: np.ndarray,
												theta0: float = 0.0, origin: Tuple[float, float] = (0.0, 0.0),
												refine: int = 8) -> Curve:
	"""
	Integrate a piecewise-linear curvature profile into heading and Cartesian
	points and build the curve. The heading integral is exact; positions use the
	trapezoid rule on a `refine`-times finer grid.
	"""
	s = np.asarray(s, dtype=float)
	kappa = np.asarray(kappa, dtype=float)
	fine = np.interp(np.arange((len(s) - 1) * refine + 1) / refine, np.arange(len(s)), s)
	fine_kappa = np.interp(fine, s, kappa)
	fine_theta = theta0 + cumulative_trapezoid(fine_kappa, fine, initial=0.0)

	x = origin[0] + cumulative_trapezoid(np.cos(fine_theta), fine, initial=0.0)
	y = origin[1] + cumulative_trapezoid(np.sin(fine_theta), fine, initial=0.0)
	step = slice(None, None, refine)
	return build_curve(np.column_stack([s, x[step], y[step], fine_theta[step], kappa,
		np.asarray(kappa_dot, dtype=float)]))


#________________________________________________________________________________#
def straight_curve(length: float, spacing: float = 1.0, heading: float = 0.0,
									origin: Tuple[float, float] = (0.0, 0.0), s0: float = 0.0) -> Curve:
	"""Straight line of the given length, starting at `origin`."""
	n = max(int(math.ceil(length / spacing)), 1) + 1
	s = np.linspace(0.0, length, n)
	x = origin[0] + s * math.cos(heading)
	y = origin[1] + s * math.sin(heading)
	zeros = np.zeros(n)
	return build_curve(np.column_stack([s + s0, x, y, np.full(n, heading), zeros, zeros]))


#________________________________________________________________________________#
def circle_curve(radius: float, length: float, spacing: float = 1.0, left: bool = True) -> Curve:
	"""Circular arc from the origin with initial heading 0, turning left by default."""
	n = max(int(math.ceil(length / spacing)), 1) + 1
	s = np.linspace(0.0, length, n)
	sign = 1.0 if left else -1.0
	phi = s / radius
	x = radius * np.sin(phi)
	y = sign * radius * (1.0 - np.cos(phi))
	theta = sign * phi
	return build_curve(np.column_stack([s, x, y, theta, np.full(n, sign / radius), np.zeros(n)]))
#================================================================================#
