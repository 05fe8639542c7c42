import dotenv
import os
import pytest

dotenv.load_dotenv()


#================================================================================#
def pytest_configure(config):
	config.addinivalue_line('markers', 'slow: long-running tuning runs, enabled with LANETUNE_SLOW_TESTS=1')


def pytest_collection_modifyitems(config, items):
	if os.getenv('LANETUNE_SLOW_TESTS', '0') == '1':
		return
	skip = pytest.mark.skip(reason='set LANETUNE_SLOW_TESTS=1 to run')
	for item in items:
		if 'slow' in item.keywords:
			item.add_marker(skip)
#================================================================================#
