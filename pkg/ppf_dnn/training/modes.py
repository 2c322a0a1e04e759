"""
What each training mode switches on.

    M0  all-ReLU net (ReLU output), He init, standard loss
    M1  linear output, He init, standard loss
    M2  M1 + branch-flow penalty, full guidance
    M3  M1 with balanced init
    M4  M2 with balanced init
    M5  M4 without guidance on voltage magnitudes: V rows take the fit
        error only, theta rows take the beta-weighted P and Q angle terms
    M6  M5 without the reactive term: theta rows take the beta-weighted
        active-power angle term only

M5 and M6 have no penalty on the V rows, so alpha is reported as 0 and the
angle weight is beta, computed from the theta rows.
"""

from dataclasses import dataclass
from typing import Dict

from ..models.enums import Guidance, InitScheme, Mode
from ..nn.network import LINEAR, RELU


@dataclass(frozen=True)
class ModeSpec:
    mode: Mode
    output_activation: str
    init: InitScheme
    guidance: Guidance

    @property
    def penalized(self) -> bool:
        return self.guidance != Guidance.NONE


MODES: Dict[Mode, ModeSpec] = {
    Mode.M0: ModeSpec(Mode.M0, RELU, InitScheme.HE, Guidance.NONE),
    Mode.M1: ModeSpec(Mode.M1, LINEAR, InitScheme.HE, Guidance.NONE),
    Mode.M2: ModeSpec(Mode.M2, LINEAR, InitScheme.HE, Guidance.FULL),
    Mode.M3: ModeSpec(Mode.M3, LINEAR, InitScheme.BALANCED, Guidance.NONE),
    Mode.M4: ModeSpec(Mode.M4, LINEAR, InitScheme.BALANCED, Guidance.FULL),
    Mode.M5: ModeSpec(Mode.M5, LINEAR, InitScheme.BALANCED, Guidance.ANGLE),
    Mode.M6: ModeSpec(Mode.M6, LINEAR, InitScheme.BALANCED, Guidance.ANGLE_ACTIVE),
}


def mode_spec(mode) -> ModeSpec:
    return MODES[Mode(mode)]
