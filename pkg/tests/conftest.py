import pytest
from ..lanetune.planner import CostParams, DesiredCostParams


#================================================================================#
@pytest.fixture
def dcfp() -> DesiredCostParams:
	return DesiredCostParams((40.0, 2.0e4, 1.0e6, 2.0e5, 1.0e4))


@pytest.fixture
def cfp() -> CostParams:
	return CostParams((10.0, 1.0e4, 1.0e6, 1.0e5, 1.0e4), 1.0)
#================================================================================#
