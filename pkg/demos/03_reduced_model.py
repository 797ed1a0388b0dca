"""
Reduced model and one backward Euler run
========================================

Assemble the reduced operators, integrate to T = 1 and compare with the
exact solution at the final time.
"""

from vmspod.fe_core import build_space
from vmspod.harness import final_l2_error
from vmspod.integrator import simulate, stability_check
from vmspod.manufactured import ManufacturedProblem, generate_snapshots
from vmspod.pod import pod
from vmspod.rom import ClosureConfig, build_model

problem = ManufacturedProblem()
space = build_space(16)
basis = pod(generate_snapshots(space, problem, dT=0.02, M=50))

r = 30
model = build_model(basis, r, problem, ClosureConfig("VMS", alpha=1e-3, R=25))
print("T antisymmetry residual:", abs(model.T + model.T.transpose(0, 2, 1)).max())

traj = simulate(model, dt=0.01, t_final=1.0)
print("final L2 error: %.4e" % final_l2_error(traj, problem, basis))
print("Newton iterations per step: max %d, mean %.2f"
      % (traj.newton_iters.max(), traj.newton_iters.mean()))

# discrete energy bound: kinetic energy plus dissipation is controlled by the forcing
lhs, rhs, holds = stability_check(traj)
print("energy bound: %.4e <= %.4e  %s" % (lhs, rhs, holds))
