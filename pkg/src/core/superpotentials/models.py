from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

MuMap = Callable[[np.ndarray], np.ndarray]


class ClassSpec(BaseModel):
    """One of the three superpotential families with its ODE and superpotential parameters."""

    class_id: Literal[1, 2, 3] = Field(
        ..., alias="class", description="ODE family: 1 Riccati, 2 even Riccati, 3 radical"
    )
    a: float = Field(default=0.0, description="ODE parameter a")
    b: float = Field(default=0.0, description="ODE parameter b")
    c: float = Field(default=0.0, description="ODE parameter c")
    d: float = Field(default=0.0, description="ODE parameter d (class 3 only)")
    k0: float = Field(default=0.0, description="Superpotential parameter k0")
    k1: float = Field(default=0.0, description="Superpotential parameter k1")

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    def rhs(self, phi: np.ndarray) -> np.ndarray:
        """Right-hand side of d(phi)/d(mu) for this family."""
        if self.class_id == 1:
            return self.a * phi**2 + self.b * phi + self.c
        if self.class_id == 2:
            return self.a * phi**2 + self.b
        return (self.c * phi + self.d) * np.sqrt(self.a**2 * phi**2 + self.b**2)

    def riccati_coefficients(self) -> Tuple[float, float, float] | None:
        """(a, b, c) of the equivalent constant-coefficient Riccati equation, if any."""
        if self.class_id == 1:
            return self.a, self.b, self.c
        if self.class_id == 2:
            return self.a, 0.0, self.b
        return None

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json", by_alias=True)


@dataclass(frozen=True)
class PhiFunction:
    """phi as a function of mu together with the solution branch that produced it.

    Closed branches also carry int phi dmu and, for even equations, int dmu/phi.
    """

    fn: MuMap = field(repr=False)
    branch: str
    mu0: float
    phi0: float
    integral: Optional[MuMap] = field(default=None, repr=False)
    reciprocal_integral: Optional[MuMap] = field(default=None, repr=False)

    def __call__(self, mu):
        return self.fn(np.asarray(mu, dtype=float))


@dataclass(frozen=True)
class Superpotential:
    """W(mu), dW/dmu and, when known, a closed antiderivative of W in mu."""

    spec: ClassSpec
    phi: PhiFunction
    value: MuMap = field(repr=False)
    derivative: MuMap = field(repr=False)
    antiderivative: Optional[MuMap] = field(default=None, repr=False)

    def __call__(self, mu):
        return self.value(np.asarray(mu, dtype=float))

    def scaled(self, factor: float) -> "Superpotential":
        """factor * W, keeping the closed antiderivative when there is one."""
        antiderivative = None
        if self.antiderivative is not None:
            base = self.antiderivative
            antiderivative = lambda mu: factor * base(mu)  # noqa: E731
        value, derivative = self.value, self.derivative
        return Superpotential(
            spec=self.spec,
            phi=self.phi,
            value=lambda mu: factor * value(mu),
            derivative=lambda mu: factor * derivative(mu),
            antiderivative=antiderivative,
        )
