"""Random conductance fields: laws, sampling, rescaling and environment events."""

from rwrc_lab.conductance.events import (
    EventFrequency,
    event_probability_mc,
    profile_event_check,
    profile_event_logprob_bound,
)
from rwrc_lab.conductance.io import field_from_dict, field_to_dict, load_field, save_field
from rwrc_lab.conductance.models import (
    ConductanceField,
    ConductanceModel,
    ConstantModel,
    EllipticModel,
    TailModel,
    constant_field,
)
from rwrc_lab.conductance.profiles import (
    RescaledField,
    rescaled_field,
    tail_functional,
    unscaled_profile,
)
from rwrc_lab.conductance.sampler import draw_conductances, sample_field

__all__ = [
    "ConductanceField",
    "ConductanceModel",
    "ConstantModel",
    "EllipticModel",
    "EventFrequency",
    "RescaledField",
    "TailModel",
    "constant_field",
    "draw_conductances",
    "event_probability_mc",
    "field_from_dict",
    "field_to_dict",
    "load_field",
    "profile_event_check",
    "profile_event_logprob_bound",
    "rescaled_field",
    "sample_field",
    "save_field",
    "tail_functional",
    "unscaled_profile",
]
