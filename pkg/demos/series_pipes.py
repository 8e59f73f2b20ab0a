"""Two pipes in series: build, check mass conservation and sweep.

Run with ``python demos/series_pipes.py``.
"""

import numpy as np

from gasnet import (ConnectionSpec, GasProperties, check_mass_conservation, dc_gain,
                    frequency_sweep, interconnect)
from gasnet.components import PipeParams, single_pipe

gas = GasProperties(R_s=500.0, T_0=300.0, z_0=0.9, c_p=1750.0, c_v=1250.0)
p1 = PipeParams.from_diameter(0.5, 1000.0, 0.01, gas, 5e6, 10.0)
p2 = PipeParams.from_diameter(0.5, 1500.0, 0.01, gas, p1.nominal_p_right, 10.0, h=10.0)

spec = ConnectionSpec(pairs=[("pipe2.l", "pipe1.r")], inputs=["pipe1.p_l", "pipe2.q_r"],
                      outputs=["pipe2.p_r", "pipe1.q_l"])
net = interconnect([single_pipe(p1, "pipe1"), single_pipe(p2, "pipe2")], spec)

print("inputs: ", [lab.key for lab in net.input_labels])
print("outputs:", [lab.key for lab in net.output_labels])
print("DC gain:\n", np.array2string(dc_gain(net), precision=6))
print(check_mass_conservation(net))

table = frequency_sweep(net, np.logspace(-4, 0, 5))
for w, g in zip(table.omega, np.abs(table.gain("pipe2.p_r", "pipe1.p_l"))):
    print(f"omega {w:9.2e} rad/s  |p_r/p_l| {g:.6f}")
