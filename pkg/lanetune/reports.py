"""
Report writers: canonical JSON documents with an optional CSV table.
"""

import json
import math
from pathlib import Path
from typing import Any
from ._baseclasses import BaseReport
from .containers import Report



#================================================================================#
def _finite_or_none(obj: Any) -> Any:
	"""Replace non-finite floats (JSON has no inf / NaN) with None."""
	if isinstance(obj, float):
		return obj if math.isfinite(obj) else None
	if isinstance(obj, dict):
		return {str(k): _finite_or_none(v) for k, v in obj.items()}
	if isinstance(obj, (list, tuple)):
		return [_finite_or_none(v) for v in obj]
	return obj


def dumps_canonical(document: dict) -> str:
	"""Sorted keys, fixed indentation, shortest round-trip floats."""
	return json.dumps(_finite_or_none(document), sort_keys=True, indent=2, allow_nan=False) + '\n'
#================================================================================#



#================================================================================#
class JsonReportWriter(BaseReport):

	"""
	Writes the document to `out`; a table, if any, goes to the same path with a
	`.csv` suffix.
	"""

	def write(self, report: Report, out: Path) -> None:
		out.write_text(dumps_canonical(report.document))
		if report.table is not None:
			report.table.to_csv(out.with_suffix('.csv'), index=False)


#________________________________________________________________________________#
class TraceWriter(BaseReport):

	"""
	Writes the table as CSV to `out` and the document (the plot spec) next to it
	as `<stem>.plot.json`.
	"""

	def write(self, report: Report, out: Path) -> None:
		if report.table is not None:
			report.table.to_csv(out, index=False)
		out.with_name(f"{out.stem}.plot.json").write_text(dumps_canonical(report.document))
#================================================================================#
