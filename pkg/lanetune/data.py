"""
Dataset model: sections, datasets, canonical JSON storage, the train/test split
and random desired-cost sets.
"""

import json
import math
import numpy as np
import pandas as pd
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
from . import logging
from .checks import generic_check_handler
from .exceptions import InputError
from .geometry import Curve, build_curve
from .kinematics import LateralState
from .planner import DesiredCostParams

#_____ GLOBALS _____#
FORMAT_NAME     = 'lanetune-dataset'
FORMAT_VERSION  = 1
PROFILE_COLUMNS = ['t', 'v', 's']



#================================================================================#
@dataclass(frozen=True)
class SectionOffsets:

	"""
	CFP-independent reference data of a section, one entry per step.

	Attributes:
		delta_d: lateral offset of the true-curve point measured on the estimate, m.
		anchors: arc length of that point's projection on the estimate, m.
		heading_shift: 2*pi multiple aligning the estimate heading with the true branch.
	"""

	delta_d: np.ndarray
	anchors: np.ndarray
	heading_shift: np.ndarray


#________________________________________________________________________________#
@dataclass
class Section:

	"""
	One continuous drive.

	Attributes:
		id: unique section name.
		sample_time: Ts, s.
		true_curve: the true lane centre.
		estimates: estimated lane centre per step j = 0..M-1.
		profile: DataFrame with columns t, v, s for j = 0..M (s on the true curve).
		x0: initial state in the true-curve frame.
		offsets: attached by `simulator.prepare_section`.
	"""

	id: str
	sample_time: float
	true_curve: Curve
	estimates: List[Curve]
	profile: pd.DataFrame
	x0: LateralState = field(default_factory=LateralState)
	offsets: Optional[SectionOffsets] = field(default=None, compare=False, repr=False)

	def __post_init__(self):
		self.profile = self.profile[PROFILE_COLUMNS].astype(float).reset_index(drop=True)
		check_section(self)

	@property
	def steps(self) -> int:
		"""Number of simulation steps M."""
		return len(self.estimates)

	@property
	def duration(self) -> float:
		return self.steps * self.sample_time

	def __repr__(self) -> str:
		return f"Section(id={self.id!r}, steps={self.steps}, Ts={self.sample_time})"


#________________________________________________________________________________#
@dataclass
class Dataset:
	sections: List[Section]
	meta: Dict[str, Any] = field(default_factory=dict)

	def __post_init__(self):
		ids = [s.id for s in self.sections]
		if len(set(ids)) != len(ids):
			raise InputError("Section ids must be unique.")

	def __len__(self) -> int:
		return len(self.sections)

	def __iter__(self):
		return iter(self.sections)

	@property
	def duration(self) -> float:
		return float(sum(s.duration for s in self.sections))

	def get(self, section_id: str) -> Section:
		for section in self.sections:
			if section.id == section_id:
				return section
		raise KeyError(f"Unknown section id '{section_id}'.")

	def subset(self, ids: Sequence[str]) -> 'Dataset':
		return Dataset([self.get(i) for i in ids], dict(self.meta))

	def summary(self) -> str:
		if not self.sections:
			return "0 sections"
		v = np.concatenate([s.profile['v'].to_numpy() for s in self.sections])
		return (f"{len(self)} sections, {self.duration:.1f} s, "
			f"speed {v.min() * 3.6:.1f}-{v.max() * 3.6:.1f} km/h")
#================================================================================#



#================================================================================#
def check_section(section: Section, horizon_extent: float = 0.0) -> None:
	"""
	Validate a section's invariants.

	`horizon_extent` (m) additionally requires each estimate to cover
	[s_j, s_j + horizon_extent] around the step-j position.
	"""
	profile = section.profile
	M = len(section.estimates)
	s = profile['s'].to_numpy()
	generic_check_handler([
		(section.sample_time > 0, f"Section {section.id}: sample time must be positive.", InputError),
		(M >= 1, f"Section {section.id}: needs at least one step.", InputError),
		(len(profile) == M + 1, f"Section {section.id}: profile has {len(profile)} rows, "
			f"expected {M + 1}.", InputError),
		(bool(np.all(np.isfinite(profile.to_numpy()))), f"Section {section.id}: profile is not finite.",
			InputError),
		(bool(np.all(np.diff(s) >= 0)), f"Section {section.id}: profile s must be nondecreasing.",
			InputError),
		(bool(np.all(profile['v'].to_numpy() >= 0)), f"Section {section.id}: negative speed.",
			InputError),
	])
	generic_check_handler([
		(section.true_curve.s_min <= s[0] and s[-1] <= section.true_curve.s_max,
			f"Section {section.id}: profile leaves the true curve.", InputError),
	])

	if horizon_extent > 0:
		short = [j for j, est in enumerate(section.estimates)
			if est.s_max < s[j] + horizon_extent - 1.0 or est.s_min > s[j] + 1.0]
		generic_check_handler([
			(not short, f"Section {section.id}: estimates at steps {short[:5]} do not cover the "
				f"{horizon_extent:.1f} m horizon.", InputError),
		])


#________________________________________________________________________________#
def planning_extent(section: Section, horizon: int) -> float:
	"""Distance the planner can look ahead of the vehicle: N * max(v) * Ts."""
	return horizon * float(section.profile['v'].max()) * section.sample_time
#================================================================================#



#================================================================================#
#_____ Canonical JSON storage ___________________________________________________#
def _canonical(obj: Any) -> str:
	return json.dumps(obj, sort_keys=True, separators=(',', ':'), allow_nan=False)


def section_to_dict(section: Section) -> dict:
	return {
		'id': section.id,
		'sample_time': section.sample_time,
		'profile': section.profile[PROFILE_COLUMNS].to_numpy().tolist(),
		'x0': section.x0.to_array().tolist(),
		'true_curve': {'nodes': section.true_curve.nodes.tolist()},
		'estimates': [{'step': j, 'nodes': est.nodes.tolist()}
			for j, est in enumerate(section.estimates)],
	}


def section_from_dict(raw: dict, sample_time: Optional[float] = None) -> Section:
	try:
		steps = [e['step'] for e in raw['estimates']]
		if steps != list(range(len(steps))):
			raise InputError(f"Section {raw.get('id')}: estimate steps must be 0..M-1 in order.")
		return Section(
			id=str(raw['id']),
			sample_time=float(raw.get('sample_time', sample_time)),
			true_curve=build_curve(raw['true_curve']['nodes']),
			estimates=[build_curve(e['nodes']) for e in raw['estimates']],
			profile=pd.DataFrame(raw['profile'], columns=PROFILE_COLUMNS),
			x0=LateralState.from_array(raw.get('x0', [0.0, 0.0, 0.0, 0.0])))
	except (KeyError, TypeError) as e:
		raise InputError(f"Malformed section record: {e!r}") from e


#________________________________________________________________________________#
def save_dataset(dataset: Dataset, path: str | Path) -> Path:
	"""
	Write `manifest.json` and one `sections/<id>.json` per section.

	Serialisation is canonical (sorted keys, shortest round-trip floats), so
	save -> load -> save reproduces the files byte for byte.
	"""
	root = Path(path)
	(root / 'sections').mkdir(parents=True, exist_ok=True)
	sample_times = {s.sample_time for s in dataset.sections}
	if len(sample_times) > 1:
		raise InputError(f"Sections use different sample times: {sorted(sample_times)}.")

	entries = []
	for section in dataset.sections:
		name = f"sections/{section.id}.json"
		(root / name).write_text(_canonical(section_to_dict(section)) + '\n')
		entries.append({'id': section.id, 'file': name})

	manifest = {
		'format': FORMAT_NAME,
		'version': FORMAT_VERSION,
		'sample_time': sample_times.pop() if sample_times else None,
		'meta': dataset.meta,
		'sections': entries,
	}
	(root / 'manifest.json').write_text(_canonical(manifest) + '\n')
	logging.info(f"Saved dataset to {root}: {dataset.summary()}")
	return root


#________________________________________________________________________________#
def load_dataset(path: str | Path) -> Dataset:
	"""
	Load a dataset directory (or a manifest file). Section entries either point
	to a file or carry the full section inline.
	"""
	path = Path(path)
	manifest_path = path / 'manifest.json' if path.is_dir() else path
	if not manifest_path.exists():
		raise FileNotFoundError(f"No dataset manifest at {manifest_path}.")
	try:
		manifest = json.loads(manifest_path.read_text())
	except json.JSONDecodeError as e:
		raise InputError(f"Manifest {manifest_path} is not valid JSON: {e}") from e

	generic_check_handler([
		(isinstance(manifest, dict) and 'sections' in manifest,
			f"Manifest {manifest_path} has no 'sections' list.", InputError),
	])
	sample_time = manifest.get('sample_time')
	sections = []
	for entry in manifest['sections']:
		if 'file' in entry:
			raw = json.loads((manifest_path.parent / entry['file']).read_text())
		else:
			raw = entry
		sections.append(section_from_dict(raw, sample_time))
	dataset = Dataset(sections, manifest.get('meta', {}))
	logging.info(f"Loaded dataset from {manifest_path.parent}: {dataset.summary()}")
	return dataset
#================================================================================#



#================================================================================#
#_____ Train / test split _______________________________________________________#
def _split_statistics(sections: Sequence[Section]) -> np.ndarray:
	"""Pooled speed mean, speed std and mean |kappa| over all steps."""
	v = np.concatenate([s.profile['v'].to_numpy() for s in sections])
	kappa = np.concatenate([s.true_curve.curvature(s.profile['s'].to_numpy()) for s in sections])
	return np.array([v.mean(), v.std(), np.abs(kappa).mean()])


def split_train_test(dataset: Dataset, test_fraction: float = 0.142,
										rng_seed: int = 0) -> Tuple[Dataset, Dataset]:
	"""
	Section-level train/test split.

	Sections are visited in a seeded random order. Sections are moved to the test
	set while that brings the test duration closer to `test_fraction` of the
	total; among the candidates, the one giving the smallest divergence between
	train and test statistics (speed mean/std, mean |kappa|) wins. Both sides get
	at least one section.
	"""
	n = len(dataset)
	generic_check_handler([
		(n >= 2, f"A split needs at least 2 sections, got {n}.", InputError),
		(0 < test_fraction < 1, f"test_fraction must lie in (0, 1), got {test_fraction}.", InputError),
	])
	sections = dataset.sections
	order = list(np.random.default_rng(rng_seed).permutation(n))
	durations = np.array([s.duration for s in sections])
	target = test_fraction * durations.sum()
	scale = np.maximum(np.abs(_split_statistics(sections)), 1e-12)

	def divergence(test_idx: List[int]) -> float:
		train_idx = [i for i in order if i not in test_idx]
		stats_test = _split_statistics([sections[i] for i in test_idx])
		stats_train = _split_statistics([sections[i] for i in train_idx])
		return float(np.sum(np.abs(stats_test - stats_train) / scale))

	test: List[int] = []
	test_duration = 0.0
	while len(test) < n - 1:
		remaining = [i for i in order if i not in test]
		candidates = [i for i in remaining
			if abs(test_duration + durations[i] - target) < abs(test_duration - target)]
		if not candidates:
			if test:
				break
			candidates = remaining
		best = min(candidates, key=lambda i: divergence(test + [i]))
		test.append(best)
		test_duration += durations[best]

	test_ids  = [sections[i].id for i in sorted(test)]
	train_ids = [s.id for s in sections if s.id not in test_ids]
	logging.info(f"Split {n} sections: {len(train_ids)} train / {len(test_ids)} test "
		f"({test_duration:.1f} s of {durations.sum():.1f} s in test)")
	return dataset.subset(train_ids), dataset.subset(test_ids)
#================================================================================#



#================================================================================#
def random_dcfp(rng_seed: int, n_sets: int, neutral: DesiredCostParams,
								factor_range: Tuple[float, float] = (0.25, 4.0)) -> List[DesiredCostParams]:
	"""
	Random desired-cost sets: the neutral weights times factors drawn
	log-uniformly in `factor_range`.
	"""
	low, high = factor_range
	generic_check_handler([
		(n_sets >= 1, f"n_sets must be >= 1, got {n_sets}.", InputError),
		(0 < low <= high, f"factor_range must be an increasing positive range, got {factor_range}.",
			InputError),
	])
	rng = np.random.default_rng(rng_seed)
	factors = np.exp(rng.uniform(math.log(low), math.log(high), size=(n_sets, 5)))
	return [DesiredCostParams(tuple(neutral.weights * f)) for f in factors]


#________________________________________________________________________________#
def with_offsets(section: Section, offsets: SectionOffsets) -> Section:
	if offsets.delta_d.shape != (section.steps,):
		raise InputError(f"Section {section.id}: offsets do not match {section.steps} steps.")
	return replace(section, offsets=offsets)
#================================================================================#
