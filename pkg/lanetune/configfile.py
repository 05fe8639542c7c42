"""Read JSON / TOML config files into a `Config`"""

import json
try:
	import tomllib
except ModuleNotFoundError:  # Python < 3.11
	import tomli as tomllib
from pathlib import Path
from typing import Optional
from . import logging
from .containers import Config
from .exceptions import InputError



#================================================================================#
# Helper functions
def read_json(jsonfile: str | Path) -> dict:
	"""Read a JSON file"""
	try:
		with open(jsonfile, 'r') as f:
			json_dict = json.load(f)
	except FileNotFoundError:
		raise FileNotFoundError(f"Config file {jsonfile} not found.")
	except json.decoder.JSONDecodeError as e:
		raise InputError(f"Config file {jsonfile} is not valid JSON: {e}") from e
	return json_dict


#________________________________________________________________________________#
def read_toml(tomlfile: str | Path) -> dict:
	"""Read a TOML file"""
	try:
		with open(tomlfile, 'rb') as f:
			toml_dict = tomllib.load(f)
	except FileNotFoundError:
		raise FileNotFoundError(f"Config file {tomlfile} not found.")
	except tomllib.TOMLDecodeError as e:
		raise InputError(f"Config file {tomlfile} is not valid TOML: {e}") from e
	return toml_dict
#================================================================================#



#================================================================================#
def report_usage() -> None:
	"""Report the config file layout"""
	logging.error("config file should contain any of the following sections:")
	logging.error("{")
	logging.error("    \"generator\": {\"n_sections\": 13, \"noise\": {...}, \"road\": {...}},")
	logging.error("    \"simulation\": {\"planner\": {\"horizon\": 30}, \"qp\": {...}},")
	logging.error("    \"de\": {\"population_size\": 50, \"max_generations\": 150},")
	logging.error("    \"split\": {...}, \"experiment\": {...}")
	logging.error("}")

#______________________________________________________________________________#
def read_config(path: Optional[str | Path] = None) -> Config:
	"""
	Read a config file; `.toml` files are parsed as TOML, anything else as JSON.
	Without a path the defaults are returned.
	"""
	if path is None or str(path) == '':
		return Config()

	path = Path(path)
	raw = read_toml(path) if path.suffix.lower() == '.toml' else read_json(path)
	if not isinstance(raw, dict):
		report_usage()
		raise InputError(f"Config file {path} must hold an object of sections.")
	try:
		return Config.from_dict(raw)
	except InputError:
		report_usage()
		raise
#================================================================================#
