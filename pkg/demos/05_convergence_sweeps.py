"""
Time-step and cutoff sweeps
===========================

Coarse versions of the two convergence studies.  The full-resolution runs
use the defaults of ``RunConfig`` (``python3 -m vmspod sweep-dt``).
"""

from vmspod.config import RunConfig
from vmspod.harness import dt_sweep, prepare, r_cutoff_sweep

cfg = RunConfig(n_div=16, dT=0.02, M=50, r=30, R=25,
                dt_set=(0.02, 0.01, 0.005, 0.0025), R_set=(5, 10, 15, 20), R_sweep_dt=0.005)
exp = prepare(cfg)

rep = dt_sweep(cfg, exp=exp)
print(rep.to_csv(), rep.summary())

rep = r_cutoff_sweep(cfg, exp=exp)
print(rep.to_csv(), rep.summary())
