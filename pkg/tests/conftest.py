import numpy as np
import pytest

from apx import asympt
from apx.numkit import solve_ode


@pytest.fixture(scope="session")
def vdp_long_run():
    """High-precision van der Pol trajectory at eps = 0.1 shared by the
    module and acceptance suites (period noise ~1e-6 relative)."""
    sys = asympt.oscillator_system("vdp", 0.1)
    traj = solve_ode(lambda t, y: sys.rhs(t, y, sys.params), 0.0, 1200.0,
                     np.array([0.5, 0.0]), 1e-10)
    period = asympt.measure_period(traj.t, traj.y[:, 0], discard_before=300.0)
    amplitude = asympt.limit_cycle_amplitude(traj, 0.1)
    return {"eps": 0.1, "traj": traj, "period": period, "amplitude": amplitude}
