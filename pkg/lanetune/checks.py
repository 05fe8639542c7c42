"""
Validation helpers shared by the config containers and the numerical modules.
"""

from typing import List, Optional, Type
from . import logging



#================================================================================#
# Helper functions ______________________________________________________________#
#================================================================================#
def generic_checker(test: bool,
										msg: str,
										exception: Type[Exception]) -> Optional[Type[Exception]]:
	"""
	Checks a generic condition, and returns the exception type if the condition is
	not met.
	"""
	if test:
		return None

	logging.error(msg)
	return exception

#________________________________________________________________________________#
def generic_check_handler(tests: List[tuple[bool, str, Type[Exception]]]) -> None:
	"""
	Checks a list of generic conditions, and raises if any of the conditions are not
	met. The first failing exception type is raised, carrying every failed message.
	"""
	failures = []
	for test in tests:
		exception = generic_checker(*test)
		if exception is not None:
			failures.append((exception, test[1]))

	# Did any errors get thrown?
	if failures:
		logging.error(f"{len(failures)} check(s) failed, raising {failures[0][0].__name__}.")
		raise failures[0][0]('; '.join(msg for _, msg in failures))
#================================================================================#
