from pathlib import Path
from typing import Optional, Protocol
from . import logging
from ._baseclasses import BaseReport
from .checks import generic_check_handler
from .containers import Report
from .data import Dataset
from .exceptions import InputError



#================================================================================#
# Helper functions ______________________________________________________________#
#================================================================================#
def dataset_checker(dataset: Dataset) -> None:
	tests = [
		(isinstance(dataset, Dataset), f"Expected a Dataset, got {type(dataset)}", TypeError),
	]
	generic_check_handler(tests)

	# An empty dataset is allowed through, but worth knowing about
	if len(dataset) == 0:
		logging.warning("Dataset is empty.")

#________________________________________________________________________________#
def report_checker(report: Report) -> None:
	tests = [
		(isinstance(report, Report), f"Expected a Report, got {type(report)}", TypeError),
		(isinstance(getattr(report, 'document', None), dict), "Report document must be a dict.",
			InputError),
		(getattr(report, 'name', '') != '', "Report name cannot be empty.", InputError),
	]
	generic_check_handler(tests)
#================================================================================#




#================================================================================#
#_____________________ Templates for the pipeline components ____________________#

#_____ Protocol class for the source ____________________________________________#
class SourceTemplate(Protocol):

	"""
	Protocol class for the source of sections.\n

	Must contain a `run` method that returns a `Dataset`.

	Sources can be found in `lanetune.studies`.

	## Example:
	>>> class MySource(SourceTemplate):
	>>>   def run(self) -> Dataset:
	>>>     return load_dataset('data/synthetic')
	"""

	def run(self) -> Dataset:
		"""The `run` method must return a Dataset object."""
		...



#_____ Protocol class for the study _____________________________________________#
class StudyTemplate(Protocol):

	"""
	Protocol class for the study run on a dataset (tuning, evaluation, traces...).

	Must contain a `run` method that accepts a `Dataset` and returns a `Report`.

	## Example:
	>>> class MyStudy(StudyTemplate):
	>>>   def run(self, dataset: Dataset) -> Report:
	>>>     cost = evaluate_cfp(dataset.sections, cfp, dcfp).total
	>>>     return Report('cost', {'total': cost})
	"""

	def run(self, dataset: Dataset) -> Report:
		"""The `run` method must accept a `Dataset` and return a `Report`."""
		...
#================================================================================#




#================================================================================#
#_____________________ TemplatePipeline class ___________________________________#
class TemplatePipeline:

	"""
	The blueprint pipeline: source -> study -> report writer, with checks at
	each stage.

	## Inputs:
	* source object (follows `SourceTemplate`)
	* study object (follows `StudyTemplate`)
	* writer (a `BaseReport`, from `lanetune.reports`)
	* out: output path of the report; None skips writing.

	## Example:
	>>> pipeline = TemplatePipeline(DatasetSource('data'), TuneStudy(dcfp), JsonReportWriter(), 'tune.json')
	>>> report = pipeline()
	"""

	def __init__(self,
							source: SourceTemplate,
							study: StudyTemplate,
							writer: BaseReport,
							out: Optional[str | Path] = None) -> None:
		self.source = source
		self.study  = study
		self.writer = writer
		self.out    = out
	#______________________________________________________________________________#

	def extract(self) -> Dataset:
		"""Read the sections."""
		dataset = self.source.run()
		dataset_checker(dataset)
		return dataset


	def analyse(self, dataset: Dataset) -> Report:
		"""Run the study."""
		report = self.study.run(dataset)
		report_checker(report)
		return report


	def write(self, report: Report) -> None:
		"""Write the report."""
		if self.out is None:
			return None
		self.writer(report, self.out)


	def run(self) -> Report:
		dataset = self.extract()
		report  = self.analyse(dataset)
		self.write(report)
		return report

	def __call__(self) -> Report:
		return self.run()
#================================================================================#
