"""
Curvature-rate estimation from a sampled curvature signal with a Kalman filter
and a Rauch-Tung-Striebel backward pass.
"""

import numpy as np
from filterpy.kalman import KalmanFilter
from filterpy.common import Q_discrete_white_noise
from typing import Sequence
from .checks import generic_check_handler
from .exceptions import InputError



#================================================================================#
def kalman_rts_smooth(kappa: Sequence[float], Ts: float,
											q_process: float = 1e-8, r_meas: float = 1e-8) -> np.ndarray:
	"""
	Smoothed curvature rate of a curvature time series.

	Constant-rate model on the state [kappa, kappa_dot] with white-noise
	acceleration of variance `q_process`, curvature measurements of variance
	`r_meas`. The filter starts from the first finite difference, so a noiseless ramp is
	tracked exactly.

	### Parameters:
	- kappa: curvature samples on a uniform grid, 1/m (at least 3).
	- Ts: sample time, s.
	- q_process, r_meas: process and measurement noise variances (> 0).

	### Returns:
	- kappa_dot: smoothed curvature rate per sample, 1/(m s).
	"""
	z = np.asarray(kappa, dtype=float)
	generic_check_handler([
		(z.ndim == 1 and z.size >= 3, f"Need at least 3 curvature samples, got {z.size}.", InputError),
		(bool(np.all(np.isfinite(z))), "Curvature samples must be finite.", InputError),
		(Ts > 0, f"Sample time must be positive, got {Ts}.", InputError),
		(q_process > 0 and r_meas > 0, "Noise variances must be positive.", InputError),
	])

	kf = KalmanFilter(dim_x=2, dim_z=1)
	kf.F = np.array([[1.0, Ts],
									[0.0, 1.0]])
	kf.H = np.array([[1.0, 0.0]])
	kf.Q = Q_discrete_white_noise(dim=2, dt=Ts, var=q_process)
	kf.R = np.array([[r_meas]])
	# batch_filter predicts before each update: start one step before the first sample
	slope = (z[1] - z[0]) / Ts
	kf.x = np.array([[z[0] - slope * Ts], [slope]])
	kf.P = np.diag([10.0 * r_meas, 20.0 * r_meas / Ts ** 2])

	means, covariances, _, _ = kf.batch_filter(z)
	smoothed, _, _, _ = kf.rts_smoother(means, covariances)
	return np.asarray(smoothed).reshape(z.size, 2)[:, 1].copy()
#================================================================================#
