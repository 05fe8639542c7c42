"""
MPC lateral trajectory planner.

Builds the desired states and disturbances from the estimated lane centre of
the current step, expands the decayed weights over the horizon, condenses the
horizon into an input-only box QP and solves it.
"""

import math
import numpy as np
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
from .checks import generic_check_handler
from .containers import QpConfig
from .exceptions import InputError
from .geometry import Curve
from .kinematics import LateralState, SystemMatrices, system_matrices, propagate
from .qpsolver import BoxQP, QpWorkspace, solve_box_qp

#_____ GLOBALS _____#
N_STATES = 4
WEIGHT_NAMES = ('d', 'theta', 'kappa', 'kappa_dot', 'u')



#================================================================================#
#_____ Cost parameters __________________________________________________________#
@dataclass(frozen=True)
class CostParams:

	"""
	Planner cost function parameters (CFP).

	Attributes:
		theta0: weight seed [w_d, w_theta, w_kappa, w_kappa_dot, w_u], all > 0.
		decay: horizon decay lambda in [0, 1]; stage k is weighted by decay**k.
	"""

	theta0: Tuple[float, ...]
	decay: float = 1.0

	def __post_init__(self):
		object.__setattr__(self, 'theta0', tuple(float(w) for w in self.theta0))
		object.__setattr__(self, 'decay', float(self.decay))
		generic_check_handler([
			(len(self.theta0) == 5, f"CFP needs 5 weights, got {len(self.theta0)}.", InputError),
			(all(math.isfinite(w) and w > 0 for w in self.theta0),
				f"CFP weights must be finite and > 0, got {self.theta0}.", InputError),
			(0.0 <= self.decay <= 1.0, f"CFP decay must lie in [0, 1], got {self.decay}.", InputError),
		])

	@property
	def weights(self) -> np.ndarray:
		return np.array(self.theta0)

	@classmethod
	def from_sequence(cls, values: Sequence[float]) -> 'CostParams':
		"""Five weights (decay 1) or five weights followed by the decay."""
		values = [float(v) for v in values]
		if len(values) == 5:
			return cls(tuple(values), 1.0)
		if len(values) == 6:
			return cls(tuple(values[:5]), values[5])
		raise InputError(f"A CFP has 5 weights and an optional decay, got {len(values)} values.")

	def scaled(self, factor: float) -> 'CostParams':
		return CostParams(tuple(w * factor for w in self.theta0), self.decay)

	def to_dict(self) -> dict:
		return {'theta0': list(self.theta0), 'decay': self.decay}


#________________________________________________________________________________#
@dataclass(frozen=True)
class DesiredCostParams:

	"""
	Desired cost function parameters (DCFP) of the simulation cost.

	Attributes:
		psi: [q_d, q_theta, q_kappa, q_kappa_dot, r_u], all > 0.
	"""

	psi: Tuple[float, ...]

	def __post_init__(self):
		object.__setattr__(self, 'psi', tuple(float(w) for w in self.psi))
		generic_check_handler([
			(len(self.psi) == 5, f"DCFP needs 5 weights, got {len(self.psi)}.", InputError),
			(all(math.isfinite(w) and w > 0 for w in self.psi),
				f"DCFP weights must be finite and > 0, got {self.psi}.", InputError),
		])

	@property
	def weights(self) -> np.ndarray:
		return np.array(self.psi)

	def as_cfp(self) -> CostParams:
		"""The DCFP used directly as planner weights, without decay."""
		return CostParams(self.psi, 1.0)

	def to_dict(self) -> dict:
		return {'psi': list(self.psi)}
#================================================================================#



#================================================================================#
def expand_weights(cfp: CostParams, N: int) -> Tuple[np.ndarray, np.ndarray]:
	"""
	Decayed horizon weights.

	### Returns:
	- Q: (N+1, 4, 4) diagonal state weights, Q[k] = diag(decay**k * theta0[:4]).
	- R: (N,) input weights, R[k] = decay**k * theta0[4].
	"""
	if N < 1:
		raise InputError(f"Horizon must be >= 1, got {N}.")
	factors = cfp.decay ** np.arange(N + 1, dtype=float)
	w = cfp.weights
	Q = np.zeros((N + 1, N_STATES, N_STATES))
	idx = np.arange(N_STATES)
	Q[:, idx, idx] = factors[:, None] * w[None, :N_STATES]
	R = factors[:N] * w[N_STATES]
	return Q, R


#________________________________________________________________________________#
def desired_states(est_curve: Curve, positions: Sequence[float]) -> np.ndarray:
	"""(n, 4) desired states [0, theta_r, kappa_r, kappa_dot_r] at the positions."""
	positions = np.asarray(positions, dtype=float)
	if positions.size == 0:
		return np.zeros((0, N_STATES))
	_, theta, kappa, kappa_dot = est_curve.frames(positions)
	return np.column_stack([np.zeros(positions.size), theta, kappa, kappa_dot])


def disturbances(est_curve: Curve, positions: Sequence[float]) -> np.ndarray:
	"""Reference heading of the estimated curve at each position, rad."""
	positions = np.asarray(positions, dtype=float)
	if positions.size == 0:
		return np.zeros(0)
	return np.asarray(est_curve.heading(positions), dtype=float)
#================================================================================#



#================================================================================#
@dataclass
class PlanningContext:

	"""
	Inputs of one planning problem.

	Attributes:
		x0: state relative to the estimated curve.
		velocities: (N,) speeds over the horizon steps, m/s.
		positions: (N+1,) planned arc lengths on the estimated curve, m.
		est_curve: the estimated lane centre of this step.
		sample_time: Ts, s.
		u_min, u_max: input bounds.
		heading_offset: constant added to the curve headings (2*pi branch shift).
	"""

	x0: np.ndarray
	velocities: np.ndarray
	positions: np.ndarray
	est_curve: Curve
	sample_time: float
	u_min: float = -0.02
	u_max: float = 0.02
	heading_offset: float = 0.0

	def __post_init__(self):
		if isinstance(self.x0, LateralState):
			self.x0 = self.x0.to_array()
		self.x0         = np.asarray(self.x0, dtype=float)
		self.velocities = np.asarray(self.velocities, dtype=float)
		self.positions  = np.asarray(self.positions, dtype=float)
		N = self.velocities.shape[0] if self.velocities.ndim == 1 else 0
		generic_check_handler([
			(self.x0.shape == (N_STATES,), f"x0 must have 4 entries, got {self.x0.shape}.", InputError),
			(N >= 1, "The horizon needs at least one step.", InputError),
			(self.positions.shape == (N + 1,),
				f"Expected {N + 1} positions, got {self.positions.shape}.", InputError),
			(bool(np.all(np.diff(self.positions) >= 0)), "Planned positions must be nondecreasing.",
				InputError),
			(self.u_min < self.u_max, "u_min must be below u_max.", InputError),
			(self.sample_time > 0, "Sample time must be positive.", InputError),
		])

	@property
	def horizon(self) -> int:
		return self.velocities.shape[0]


#________________________________________________________________________________#
@dataclass
class HorizonModel:

	"""
	Weight-independent part of a condensed problem.

	Stacked prediction over k = 1..N: x = F x0 + G u + W z. `free` holds W z - x_des,
	so the prediction error is F x0 + G u + free.
	"""

	matrices: List[SystemMatrices]
	F: np.ndarray
	G: np.ndarray
	W: np.ndarray
	desired: np.ndarray
	disturbances: np.ndarray
	free: np.ndarray


#________________________________________________________________________________#
@dataclass
class PlanResult:
	inputs: np.ndarray
	predicted_states: Optional[np.ndarray]
	cost: float
	iterations: int
	kkt_residual: float
#================================================================================#



#================================================================================#
def prediction_matrices(velocities: Sequence[float],
												Ts: float) -> Tuple[List[SystemMatrices], np.ndarray, np.ndarray, np.ndarray]:
	"""
	Per-step matrices and the stacked prediction F (4N, 4), G (4N, N), W (4N, N).

	Row block k-1 holds the state at step k.
	"""
	velocities = np.asarray(velocities, dtype=float)
	N = velocities.shape[0]
	matrices = [system_matrices(v, Ts) for v in velocities]
	F = np.zeros((N, N_STATES, N_STATES))
	G = np.zeros((N, N_STATES, N))
	W = np.zeros((N, N_STATES, N))

	F[0] = matrices[0].A
	G[0, :, 0] = matrices[0].B
	W[0, :, 0] = matrices[0].E
	for k in range(1, N):
		A = matrices[k].A
		F[k] = A @ F[k - 1]
		G[k] = A @ G[k - 1]
		W[k] = A @ W[k - 1]
		G[k, :, k] = matrices[k].B
		W[k, :, k] = matrices[k].E
	return matrices, F.reshape(N * N_STATES, N_STATES), G.reshape(N * N_STATES, N), \
		W.reshape(N * N_STATES, N)


#________________________________________________________________________________#
def horizon_model(ctx: PlanningContext) -> HorizonModel:
	"""Everything in the condensed problem that does not depend on x0 or the weights."""
	matrices, F, G, W = prediction_matrices(ctx.velocities, ctx.sample_time)
	desired = desired_states(ctx.est_curve, ctx.positions)
	desired[:, 1] += ctx.heading_offset
	z = disturbances(ctx.est_curve, ctx.positions[:-1]) + ctx.heading_offset
	free = W @ z - desired[1:].ravel()
	return HorizonModel(matrices, F, G, W, desired, z, free)


#________________________________________________________________________________#
def condense(ctx: PlanningContext, cfp: CostParams,
						weights: Optional[Tuple[np.ndarray, np.ndarray]] = None,
						model: Optional[HorizonModel] = None) -> BoxQP:
	"""
	Condense the horizon into a box QP in the input sequence.

	H = G'QG + R and g = G'Q c with c = F x0 + W z - x_des over k = 1..N. The
	stage k = 0 state term does not depend on the inputs and is left out; the
	planner cost of an input sequence u is `2 * qp.objective(u) + qp.offset`.
	"""
	N = ctx.horizon
	model = model or horizon_model(ctx)
	Q, R = weights if weights is not None else expand_weights(cfp, N)
	if Q.shape != (N + 1, N_STATES, N_STATES) or R.shape != (N,) or model.G.shape != (N * N_STATES, N):
		raise InputError(f"Weights / model do not match the horizon N={N}.")

	q = np.diagonal(Q[1:], axis1=1, axis2=2).ravel()
	c = model.F @ ctx.x0 + model.free
	QG = q[:, None] * model.G
	H = model.G.T @ QG
	H[np.diag_indices(N)] += R
	H = 0.5 * (H + H.T)
	g = QG.T @ c
	return BoxQP(H, g, np.full(N, ctx.u_min), np.full(N, ctx.u_max), offset=float(c @ (q * c)))


#________________________________________________________________________________#
def rollout(x0: np.ndarray, inputs: np.ndarray, model: HorizonModel) -> np.ndarray:
	"""(N+1, 4) predicted states by stepping the per-step dynamics."""
	states = np.empty((len(inputs) + 1, N_STATES))
	states[0] = x0
	for k, (u, z, matrices) in enumerate(zip(inputs, model.disturbances, model.matrices)):
		states[k + 1] = propagate(states[k], u, z, matrices)
	return states


#________________________________________________________________________________#
def plan(ctx: PlanningContext, cfp: CostParams,
				qp_cfg: Optional[QpConfig] = None,
				weights: Optional[Tuple[np.ndarray, np.ndarray]] = None,
				workspace: Optional[QpWorkspace] = None,
				model: Optional[HorizonModel] = None,
				predict: bool = True) -> PlanResult:
	"""
	Solve one planning problem.

	### Parameters:
	- ctx: planning context.
	- cfp: cost function parameters.
	- qp_cfg: solver settings (ignored when a workspace is given).
	- weights: precomputed `expand_weights(cfp, N)`.
	- workspace: warm-started solver state owned by the caller.
	- model: precomputed `horizon_model(ctx)` for this context's curve and velocities.
	- predict: also roll out the predicted states.

	### Raises:
	- NonConvergenceError / NotPositiveDefiniteError from the solver.
	"""
	model = model or horizon_model(ctx)
	qp = condense(ctx, cfp, weights, model)
	if workspace is not None:
		solution = workspace.solve(qp)
	else:
		solution = solve_box_qp(qp, qp_cfg)
	u = solution.u
	predicted = rollout(ctx.x0, u, model) if predict else None
	return PlanResult(
		inputs=u,
		predicted_states=predicted,
		cost=2.0 * qp.objective(u) + qp.offset,
		iterations=solution.iterations,
		kkt_residual=solution.kkt_residual)
#================================================================================#
