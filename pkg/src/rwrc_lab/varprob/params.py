"""Regime parameters derived from the tail law."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, computed_field

from rwrc_lab.conductance.models import TailModel


class RegimeParams(BaseModel):
    """Tail exponent and constant with the derived p and K_{η,D}."""

    model_config = ConfigDict(frozen=True)

    eta: float = Field(..., gt=0, description="Tail exponent η")
    D: float = Field(..., gt=0, description="Tail constant D")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def p(self) -> float:
        """p = 2η/(1+η), always in (0, 2)."""
        return 2.0 * self.eta / (1.0 + self.eta)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def K(self) -> float:
        """K_{η,D} = (1 + 1/η)(Dη)^{1/(1+η)}."""
        return (1.0 + 1.0 / self.eta) * (self.D * self.eta) ** (1.0 / (1.0 + self.eta))

    @classmethod
    def from_model(cls, model: TailModel) -> "RegimeParams":
        return cls(eta=model.eta, D=model.D)


def eta_from_p(p: float) -> float:
    """Inverse of p = 2η/(1+η) on (0, 2)."""
    return p / (2.0 - p)
