import math
import pathlib

from spectral_torus import bifurcation
from spectral_torus import Config
from spectral_torus import elliptic_solver
from spectral_torus import linear_ops
from spectral_torus import models
from spectral_torus.spectral import expressions
from spectral_torus.spectral import field_io

# The Config class will look for a .env file in your script's current working directory.
# Every setting can also be given as SPECTRAL_TORUS_* environment variable.
config = Config()
out_dir = pathlib.Path(config.out_dir) / "quickstart"

# 1. Check the operator for resonances before solving
spec = models.EllipticOperatorSpec(nu=(1.3,), m=1.0)
report = linear_ops.resonance_scan(spec, delta=0.0, kmax=config.kmax)
print(report.to_text())

# 2. Solve L u = eps F(u) for a nonresonant operator
f = expressions.ScalarFunctionSpec(expression="u**2 + cos(x)")
solve_config = models.SolveConfig(epsilon=0.01, cutoff=32)
result = elliptic_solver.solve_elliptic(spec, f, solve_config)
print(
    f"residual={result.residual:.3e}, iterations={result.iterations}, "
    f"epsilon_star={result.epsilon_star:.3e}"
)
field_io.write_field(result.solution, out_dir / "solution.txt", solve_config.space)

# 3. At a resonant mass the trivial solution bifurcates
basis = bifurcation.kernel_basis((1.0, math.sqrt(2.0)), 3.0)
data = bifurcation.bifurcation_coefficients(basis)
print(f"kernel modes {basis.modes}: A={data.A:.6f}, B={data.B:.6f}, sigma={data.sigma}")

# branches only exist for sign(eps_m) = sigma
eps_m = 1e-3 * data.sigma
branch = bifurcation.branch_solve(basis, eps_m)
print(f"branch at eps_m={eps_m}: |alpha|^2 = {branch.z_measured}, residual={branch.residual:.3e}")
