"""Valve manifold: two tanks joined by two pipe-valve-pipe legs.

Each leg is a single pipe whose friction factor absorbs the valve loss.
Tank entrances are linearized orifices; the pieces are joined by the
interconnect module.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from ..errors import InvalidParams
from ..interconnect import ConnectionSpec, interconnect, relabel
from ..model import LabeledLinearModel, p_port, q_port
from .pipes import PipeParams, single_pipe
from .tanks import TankParams, entrance_tank
from .valves import OrificeParams

MANIFOLD_STATES = ("p_T1", "p_r1", "q_l1", "p_r2", "q_l2", "p_T2")


def manifold_parts(tank1: TankParams, tank2: TankParams, legs: Sequence[PipeParams],
                   orifices: Sequence[OrificeParams], p_inlet: float,
                   entrance_area: float | None = None):
    """Component models ``(T1, leg1, leg2, T2)`` before interconnection."""
    if len(legs) != 2 or len(orifices) != 2:
        raise InvalidParams("the manifold has exactly two legs and two entrance orifices")
    t1 = replace(tank1, n_inlets=1, n_outlets=2)
    t2 = replace(tank2, n_inlets=2, n_outlets=1)
    legs = [replace(leg, nominal_p_left=t1.nominal_p) for leg in legs]
    p_leg_out = [leg.nominal_p_right for leg in legs]
    if not p_inlet > t1.nominal_p:
        raise InvalidParams("inlet pressure must exceed the tank 1 pressure")
    if not min(p_leg_out) > t2.nominal_p:
        raise InvalidParams("leg outlet pressures must exceed the tank 2 pressure")
    T1 = entrance_tank(t1, orifices[0], [p_inlet], entrance_area, name="T1")
    T2 = entrance_tank(t2, orifices[1], p_leg_out, entrance_area, name="T2")
    return T1, single_pipe(legs[0], "leg1"), single_pipe(legs[1], "leg2"), T2


def assemble_manifold(T1: LabeledLinearModel, leg1: LabeledLinearModel, leg2: LabeledLinearModel,
                      T2: LabeledLinearModel, name: str = "manifold") -> LabeledLinearModel:
    """Join prebuilt tank and leg models and rename the result.

    State ``(p_T1, p_r1, q_l1, p_r2, q_l2, p_T2)``, input ``(p_l, q_r)``,
    output ``(p_r, q_l)`` where ``p_r`` is the tank 2 pressure and ``q_l``
    the flow entering tank 1.
    """
    spec = ConnectionSpec(
        pairs=(("leg1.l", "T1.r1"), ("leg2.l", "T1.r2"),
               ("T2.l1", "leg1.r"), ("T2.l2", "leg2.r")),
        inputs=("T1.p_l1", "T2.q_r1"),
        outputs=("T2.p", "T1.q_l1"),
    )
    closed = interconnect([T1, leg1, leg2, T2], spec)
    nominal = dict(closed.nominal)
    renamed = {
        "p_T1": nominal.get("T1.p"), "p_T2": nominal.get("T2.p"),
        "p_l": nominal.get("T1.p_l1"), "q_l": nominal.get("T1.q_l1"),
        "p_r": nominal.get("T2.p"), "q_r": nominal.get("T1.q_l1"),
    }
    for i in (1, 2):
        renamed[f"p_r{i}"] = nominal.get(f"leg{i}.p_r")
        renamed[f"q_l{i}"] = nominal.get(f"leg{i}.q_l")
    renamed = {f"{name}.{k}": v for k, v in renamed.items() if v is not None}
    return relabel(
        closed, name, MANIFOLD_STATES, ("p_l", "q_r"), ("p_r", "q_l"),
        ports=(p_port(name, "l", "p_l", "q_l"), q_port(name, "r", "q_r", "p_r")),
        nominal=renamed,
    )


def valve_manifold(tank1: TankParams, tank2: TankParams, legs: Sequence[PipeParams],
                   orifices: Sequence[OrificeParams], p_inlet: float, name: str = "manifold",
                   entrance_area: float | None = None) -> LabeledLinearModel:
    """Linear valve manifold about the tanks' nominal pressures.

    The legs are linearized with their left pressure set to the tank 1
    pressure; their stationary right pressures feed the tank 2 entrances.
    ``entrance_area`` defaults to each orifice's full opening.
    """
    return assemble_manifold(*manifold_parts(tank1, tank2, legs, orifices, p_inlet,
                                             entrance_area), name=name)
