"""Component model constructors."""

from .compressor import (CompressorMap, CompressorParams, QuadraticMap, compressor_equilibrium,
                         compressor_jacobian, compressor_rhs, compressor_system,
                         dynamic_compressor, static_compressor)
from .heat_exchanger import (HeatExchangerParams, heat_exchanger, heat_exchanger_equilibrium,
                             heat_exchanger_jacobian, heat_exchanger_rhs, heat_exchanger_system)
from .junctions import branch, internal_flow_weights, joint, joint_pair, star_junction
from .linearize import NonlinearSystem, linearize, numerical_jacobians, steady_residual
from .manifold import assemble_manifold, manifold_parts, valve_manifold
from .pipes import PipeCoefficients, PipeParams, pipe_coefficients, single_pipe
from .tanks import (TankParams, entrance_tank, entrance_tank_from_coefficients, isothermal_tank,
                    nonisothermal_tank, nonisothermal_tank_jacobian, nonisothermal_tank_rhs,
                    nonisothermal_tank_system, tank_equilibrium)
from .valves import (OrificeParams, dynamic_valve, dynamic_valve_system, orifice_flow,
                     orifice_linearization, static_gain, static_two_port, static_valve)

__all__ = [name for name in dir() if not name.startswith("_")]
