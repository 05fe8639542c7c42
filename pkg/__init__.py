"""
LaneTune is a Python package for closed-loop simulation and weight tuning of
an MPC lateral lane-keeping planner.

Currently supported sources:
- Synthetic roads with noisy lane-centre estimates
- Recorded odometry with per-step lane-polynomial estimates

Currently supported studies:
- Differential-evolution tuning against a desired cost
- Evaluation against the desired-cost baseline
- Closed-loop traces
- Multi-DCFP experiment

Requires:
- config file (JSON or TOML), optional

"""
