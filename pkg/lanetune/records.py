"""
Ingestion of recorded drives.

Records are a DataFrame with one row per timestamp:

	t, v, x, y, heading, kappa        odometry of a drive along the lane centre
	est_c0, est_c1, est_c2, est_c3    estimated lane centre as a cubic in the
	                                  vehicle frame, y = c0 + c1 x + c2 x^2 + c3 x^3

They are resampled onto a uniform grid and turned into a Section whose true
curve is the driven path and whose estimates are the recorded lane polynomials.
"""

import math
import numpy as np
import pandas as pd
from typing import Sequence
from scipy.integrate import cumulative_trapezoid
from . import logging
from .checks import generic_check_handler
from .data import Section
from .exceptions import InputError
from .geometry import build_curve, wrap_angle
from .kinematics import LateralState
from .smoothing import kalman_rts_smooth

#_____ GLOBALS _____#
ODOMETRY_COLUMNS = ['t', 'v', 'x', 'y', 'heading', 'kappa']
ESTIMATE_COLUMNS = ['est_c0', 'est_c1', 'est_c2', 'est_c3']



#================================================================================#
def resample_records(records: pd.DataFrame, Ts: float, max_gap: float = 0.5,
										angle_columns: Sequence[str] = ('heading',)) -> pd.DataFrame:
	"""
	Linearly interpolate every numeric column onto a uniform `Ts` grid starting at
	the first timestamp. Angle columns are unwrapped before and wrapped after.

	### Raises:
	- InputError: timestamps not strictly increasing, or a gap above `max_gap`.
	"""
	generic_check_handler([
		('t' in records.columns, "Records need a 't' column.", InputError),
		(Ts > 0, f"Sample time must be positive, got {Ts}.", InputError),
		(len(records) >= 2, "Records need at least two rows.", InputError),
	])
	t = records['t'].to_numpy(dtype=float)
	gaps = np.diff(t)
	generic_check_handler([
		(bool(np.all(gaps > 0)), "Record timestamps must be strictly increasing.", InputError),
	])
	generic_check_handler([
		(float(gaps.max()) <= max_gap,
			f"Record gap of {gaps.max():.3f} s at t={t[np.argmax(gaps)]:.3f} exceeds {max_gap} s.",
			InputError),
	])

	n = int(math.floor((t[-1] - t[0]) / Ts + 1e-9)) + 1
	grid = t[0] + np.arange(n) * Ts
	out = {'t': grid}
	for column in records.columns:
		if column == 't':
			continue
		values = records[column].to_numpy(dtype=float)
		if column in angle_columns:
			out[column] = wrap_angle(np.interp(grid, t, np.unwrap(values)))
		else:
			out[column] = np.interp(grid, t, values)
	return pd.DataFrame(out, columns=list(records.columns))


#________________________________________________________________________________#
def _estimate_nodes(row: pd.Series, s_vehicle: float, heading: float, v: float,
									back_margin: float, lookahead: float, spacing: float) -> np.ndarray:
	"""Node table of one recorded lane polynomial, expressed in world coordinates."""
	c0, c1, c2, c3 = (float(row[c]) for c in ESTIMATE_COLUMNS)
	xi = np.arange(-back_margin, lookahead + spacing / 2, spacing)
	y   = c0 + c1 * xi + c2 * xi ** 2 + c3 * xi ** 3
	dy  = c1 + 2 * c2 * xi + 3 * c3 * xi ** 2
	ddy = 2 * c2 + 6 * c3 * xi

	# Arc length along the polynomial, anchored at the vehicle's abscissa
	stretch = np.sqrt(1.0 + dy ** 2)
	s = cumulative_trapezoid(stretch, xi, initial=0.0)
	s = s_vehicle + s - np.interp(0.0, xi, s)

	cos_h, sin_h = math.cos(heading), math.sin(heading)
	x_w = float(row['x']) + cos_h * xi - sin_h * y
	y_w = float(row['y']) + sin_h * xi + cos_h * y
	theta = heading + np.arctan(dy)
	kappa = ddy / stretch ** 3
	kappa_dot = v * np.gradient(kappa, s)
	return np.column_stack([s, x_w, y_w, theta, kappa, kappa_dot])


#________________________________________________________________________________#
def section_from_records(records: pd.DataFrame, section_id: str, Ts: float = 0.1,
												q_process: float = 1e-8, r_meas: float = 1e-8,
												back_margin: float = 5.0, lookahead: float = 120.0,
												spacing: float = 1.0) -> Section:
	"""
	Build a section from records already on a uniform `Ts` grid.

	The true curve follows the odometry path; its curvature rate is the
	Kalman/RTS-smoothed derivative of the recorded curvature. One estimate per
	step comes from that step's lane polynomial.
	"""
	missing = [c for c in ODOMETRY_COLUMNS + ESTIMATE_COLUMNS if c not in records.columns]
	generic_check_handler([
		(not missing, f"Records lack columns: {missing}.", InputError),
		(len(records) >= 3, "A section needs at least 3 records.", InputError),
	])
	generic_check_handler([
		(bool(np.all(records['v'].to_numpy() > 0)), "Recorded speeds must be positive.", InputError),
	])

	t = records['t'].to_numpy(dtype=float)
	v = records['v'].to_numpy(dtype=float)
	heading = np.unwrap(records['heading'].to_numpy(dtype=float))
	kappa = records['kappa'].to_numpy(dtype=float)
	kappa_dot = kalman_rts_smooth(kappa, Ts, q_process, r_meas)
	s = cumulative_trapezoid(v, t, initial=0.0)

	# True curve on an arc-length grid no coarser than `spacing`
	grid = np.linspace(0.0, s[-1], max(int(math.ceil(s[-1] / spacing)), 1) + 1)
	table = np.column_stack([grid] + [np.interp(grid, s, column) for column in
		(records['x'].to_numpy(dtype=float), records['y'].to_numpy(dtype=float),
		heading, kappa, kappa_dot)])
	true_curve = build_curve(table)

	estimates = [build_curve(_estimate_nodes(records.iloc[j], s[j], heading[j], v[j],
		back_margin, lookahead, spacing)) for j in range(len(records) - 1)]

	profile = pd.DataFrame({'t': t - t[0], 'v': v, 's': s})
	x0 = LateralState(0.0, float(heading[0]), float(kappa[0]), float(kappa_dot[0]))
	logging.info(f"Built section {section_id} from {len(records)} records ({s[-1]:.0f} m)")
	return Section(section_id, Ts, true_curve, estimates, profile, x0)


#________________________________________________________________________________#
def resample_section(records: pd.DataFrame, Ts: float = 0.1, section_id: str = 'recorded',
										max_gap: float = 0.5, **kwargs) -> Section:
	"""Resample raw records onto the `Ts` grid and build the section."""
	return section_from_records(resample_records(records, Ts, max_gap), section_id, Ts, **kwargs)
#================================================================================#
