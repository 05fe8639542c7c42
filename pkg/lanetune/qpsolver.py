"""
Dense box-constrained convex QP solver:

	min 0.5 u'Hu + g'u  s.t.  lb <= u <= ub

Projected Newton with an epsilon-active set and an Armijo search along the
projection arc. The free-variable Newton system is solved with a Cholesky
factorisation of the reduced Hessian.
"""

import numpy as np
from dataclasses import dataclass, field
from typing import Optional
from scipy.linalg import cho_factor, cho_solve, LinAlgError
from .containers import QpConfig
from .exceptions import InputError, NotPositiveDefiniteError, NonConvergenceError



#================================================================================#
@dataclass
class BoxQP:

	"""
	Box QP in condensed form.

	Attributes:
		H: (N, N) symmetric positive definite Hessian.
		g: (N,) linear term.
		lb, ub: (N,) bounds.
		offset: constant term, so that the planner cost is `2 * objective(u) + offset`.
	"""

	H: np.ndarray
	g: np.ndarray
	lb: np.ndarray
	ub: np.ndarray
	offset: float = 0.0

	def __post_init__(self):
		self.H  = np.asarray(self.H, dtype=float)
		self.g  = np.asarray(self.g, dtype=float)
		self.lb = np.asarray(self.lb, dtype=float)
		self.ub = np.asarray(self.ub, dtype=float)
		n = self.g.shape[0] if self.g.ndim == 1 else -1
		if self.H.shape != (n, n) or self.lb.shape != (n,) or self.ub.shape != (n,):
			raise InputError(f"BoxQP dimension mismatch: H {self.H.shape}, g {self.g.shape}, "
				f"lb {self.lb.shape}, ub {self.ub.shape}.")
		if np.any(self.lb > self.ub):
			raise InputError("BoxQP lower bounds exceed upper bounds.")

	@property
	def size(self) -> int:
		return self.g.shape[0]

	def objective(self, u: np.ndarray) -> float:
		return float(0.5 * u @ (self.H @ u) + self.g @ u)

	def kkt_residual(self, u: np.ndarray) -> float:
		"""Infinity norm of u - clip(u - (Hu + g), lb, ub)."""
		return _residual(u, self.H @ u + self.g, self.lb, self.ub)


#________________________________________________________________________________#
@dataclass
class QpSolution:
	u: np.ndarray
	iterations: int
	kkt_residual: float
	# Objective at the start point and after every accepted update
	objectives: np.ndarray = field(default_factory=lambda: np.zeros(0))
#================================================================================#



#================================================================================#
def _residual(u: np.ndarray, grad: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> float:
	if u.size == 0:
		return 0.0
	return float(np.max(np.abs(u - np.clip(u - grad, lb, ub))))


#________________________________________________________________________________#
def solve_box_qp(qp: BoxQP, cfg: Optional[QpConfig] = None,
								warm_start: Optional[np.ndarray] = None) -> QpSolution:
	"""
	Solve a box QP to a projected-gradient KKT residual of `cfg.tol_kkt`.

	### Parameters:
	- qp: the problem.
	- cfg: solver settings.
	- warm_start: optional starting point (clipped onto the box).

	### Raises:
	- NotPositiveDefiniteError: H is not positive definite.
	- NonConvergenceError: `cfg.max_iter` exceeded; carries the best iterate.
	"""
	cfg = cfg or QpConfig()
	H, g, lb, ub = qp.H, qp.g, qp.lb, qp.ub
	n = qp.size
	if n == 0:
		return QpSolution(np.zeros(0), 0, 0.0)

	try:
		full = cho_factor(H)
	except LinAlgError as e:
		raise NotPositiveDefiniteError(f"QP Hessian is not positive definite: {e}") from e
	if not np.all(np.isfinite(full[0])):
		raise NotPositiveDefiniteError("QP Hessian factorisation is not finite.")

	# Unconstrained minimiser: done when it is feasible
	u_free = -cho_solve(full, g)
	if np.all(u_free >= lb) and np.all(u_free <= ub):
		res = _residual(u_free, H @ u_free + g, lb, ub)
		if res <= cfg.tol_kkt:
			return QpSolution(u_free, 1, res, np.array([qp.objective(u_free)]))

	u = np.clip(u_free if warm_start is None else np.asarray(warm_start, dtype=float), lb, ub)
	f = qp.objective(u)
	history = [f]
	lipschitz = float(np.max(np.sum(np.abs(H), axis=1)))
	res = np.inf

	for iteration in range(1, cfg.max_iter + 1):
		grad = H @ u + g
		res = _residual(u, grad, lb, ub)
		if res <= cfg.tol_kkt:
			return QpSolution(u, iteration, res, np.array(history))

		# Epsilon-active set: near a bound with the gradient pushing outward
		eps = min(res, 1e-6 * (1.0 + float(np.max(ub - lb))))
		binding = ((u <= lb + eps) & (grad > 0)) | ((u >= ub - eps) & (grad < 0))
		free = ~binding

		direction = -grad.copy()
		if np.any(free):
			if np.all(free):
				direction = -cho_solve(full, grad)
			else:
				try:
					reduced = cho_factor(H[np.ix_(free, free)])
				except LinAlgError as e:
					raise NotPositiveDefiniteError(f"Reduced QP Hessian is not positive definite: {e}") from e
				direction[free] = -cho_solve(reduced, grad[free])

		# With the binding variables on their bounds, a Newton step that stays inside
		# the box is the exact minimiser on this face
		trial = u + direction
		on_face = bool(np.all((u[binding] == lb[binding]) | (u[binding] == ub[binding])))
		if on_face and np.all(trial[free] >= lb[free]) and np.all(trial[free] <= ub[free]):
			candidate = u.copy()
			candidate[free] = trial[free]
			u, f = candidate, qp.objective(candidate)
			history.append(f)
			continue

		alpha = 1.0
		accepted = False
		for _ in range(cfg.max_backtracks):
			candidate = np.clip(u + alpha * direction, lb, ub)
			f_candidate = qp.objective(candidate)
			if f_candidate <= f and f_candidate <= f + cfg.armijo * float(grad @ (candidate - u)):
				accepted = True
				break
			alpha *= 0.5

		if not accepted:
			# Projected gradient step with step 1/L always decreases the objective
			candidate = np.clip(u - grad / lipschitz, lb, ub)
			f_candidate = qp.objective(candidate)

		u, f = candidate, f_candidate
		history.append(f)

	raise NonConvergenceError(
		f"Box QP did not converge in {cfg.max_iter} iterations (residual {res:.3e}).",
		best=u, residual=float(res), iterations=cfg.max_iter)
#================================================================================#



#================================================================================#
@dataclass
class QpWorkspace:

	"""
	Reusable single-owner solver state for receding-horizon use.

	The previous solution, shifted by one step (last entry repeated), seeds the
	next solve. Only the speed is affected, not the solution.
	"""

	cfg: QpConfig = field(default_factory=QpConfig)
	previous: Optional[np.ndarray] = None
	solves: int = 0
	iterations: int = 0

	def solve(self, qp: BoxQP) -> QpSolution:
		start = None
		if self.previous is not None and self.previous.shape == (qp.size,) and qp.size > 0:
			start = np.concatenate((self.previous[1:], self.previous[-1:]))
		solution = solve_box_qp(qp, self.cfg, warm_start=start)
		self.previous    = solution.u
		self.solves     += 1
		self.iterations += solution.iterations
		return solution

	def reset(self) -> None:
		self.previous = None
#================================================================================#
