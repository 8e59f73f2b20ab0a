"""Linear state-space models of gas networks and their interconnection."""

from .errors import *  # noqa: F401,F403
from .interconnect import (ConnectionMatrices, ConnectionSpec, build_connection_matrices,
                           close_interconnection, connect_by_name, interconnect, relabel, stack,
                           validate_ports)
from .model import (GasProperties, LabeledLinearModel, Port, SignalLabel, dc_gain,
                    frequency_response, permute_states, select, validate_dimensions)
from .sim import Trajectory, TimeGrid, frequency_sweep, simulate_linear, simulate_nonlinear
from .verify import (MassReport, SignalPartition, brute_force_junction, check_mass_conservation,
                     finite_difference_jacobian, steady_state_residual)

__version__ = "0.1.0"
