from setuptools import setup, find_packages

# Get the requirements from the requirements.txt file
with open('requirements.txt') as f:
	requirements = [line for line in f.read().splitlines() if line and not line.startswith('#')]

setup(
	name = 'lanetune',
	version = '0.1.0',
	author = 'Ben Davies',
	packages = find_packages(exclude=['tests', 'acceptance_tests']),
	install_requires = requirements,
	python_requires = '>=3.10',
	entry_points = {
		'console_scripts': ['lanetune=lanetune.cli:main'],
	},
	classifiers = [
		'Programming Language :: Python :: 3',
		'License :: OSI Approved :: MIT License',
		'Operating System :: OS Independent'
	]
)
