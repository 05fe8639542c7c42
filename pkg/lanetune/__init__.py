"""
Lane-keeping planner Tuning kit
"""

#______________________________________________________________________________#
import os
import logging
from dotenv import load_dotenv

load_dotenv()
logging.\
	basicConfig(level=os.getenv('LANETUNE_LOG_LEVEL', 'INFO').upper(),
#			format='%(asctime)s: %(levelname)s ==== %(filename)s:%(module)s:%(funcName)s: %(message)s',
			format='%(asctime)s: LaneTune - %(levelname)s ==== %(module)s: %(message)s',
			datefmt='%H:%M:%S')
