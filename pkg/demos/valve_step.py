"""Opening a dynamic valve: nonlinear step against the closed-form area.

Run with ``python demos/valve_step.py``.
"""

import numpy as np

from gasnet import GasProperties, TimeGrid, simulate_nonlinear
from gasnet.components import OrificeParams, dynamic_valve_system

gas = GasProperties(R_s=500.0, T_0=300.0, z_0=0.9, c_p=1750.0, c_v=1250.0)
o = OrificeParams(0.8, 0.05, 0.1, gas, 2e-3, 0.5)

tr = simulate_nonlinear(dynamic_valve_system(o), lambda t: np.array([1.0, 5e6, 4e6]), [0.0],
                        TimeGrid(0.0, 3.0, 0.01), state_scale=o.K)
exact = o.K * (1 - np.exp(-tr.times / o.tau))
print(f"max area error {np.max(np.abs(tr['valve.A_o'] - exact)):.3e} m2")
for t in (0.5, 1.0, 3.0):
    i = int(round(t / 0.01))
    print(f"t {t:4.1f} s  A_o {tr['valve.A_o'][i]:.6e} m2  q_v {tr['valve.q_v'][i]:8.3f} kg/s")
