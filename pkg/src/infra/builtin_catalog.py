import logging
import math
from dataclasses import replace
from typing import Dict, Sequence

import numpy as np

from core.catalog.models import CatalogDefinition, CatalogEntry, EntryParameters, Fixture
from core.catalog.repository import CatalogRepository
from core.errors import ConfigError, ParameterError
from core.superpotentials.models import ClassSpec

logger = logging.getLogger(__name__)


def _require(condition: bool, entry: str, message: str) -> None:
    if not condition:
        raise ParameterError(f"{entry}: {message}")


def _sech(z):
    return 1.0 / np.cosh(z)


def _csch(z):
    return 1.0 / np.sinh(z)


def _coth(z):
    return 1.0 / np.tanh(z)


def _window(params: EntryParameters, default):
    return tuple(params.mu_window) if params.mu_window is not None else default


def shifted_ho(params: EntryParameters) -> CatalogEntry:
    k0, k1 = params.k0, params.k1
    omega, lam = params.p * k0, -params.p * k1
    _require(omega != 0.0, "shifted-ho", "omega_kappa = (kappa+1) k0 must be nonzero")
    return CatalogEntry(
        name="shifted-ho",
        class_id=1,
        constraint="a=b=0, c=1",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, c=1.0, k0=k0, k1=k1),
        phi_anchor=(0.0, 0.0),
        derived={"omega_kappa": omega, "lambda_kappa": lam},
        phi=lambda mu: mu,
        w=lambda mu: k0 * mu + k1,
        potential=lambda mu: 0.5 * omega**2 * (mu - lam / omega) ** 2,
        structure=lambda mu: np.full_like(mu, omega),
        ground_log=lambda mu: -0.5 * omega * mu**2 + lam * mu,
        eps0=0.5 * omega,
        mu_window=_window(params, (-8.0, 8.0)),
    )


def morse(params: EntryParameters) -> CatalogEntry:
    c, k0 = params.c, params.k0
    _require(c != 0.0, "morse", "c must be nonzero")
    _require(params.k1 == 0.0, "morse", "the entry requires k1 = 0")
    lam = params.p * k0 / c**2
    j = -(lam * c + 0.5)
    return CatalogEntry(
        name="morse",
        class_id=1,
        constraint="a=0, c=-b, k1=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, b=-c, c=c, k0=k0),
        phi_anchor=(0.0, 1.0 - 1.0 / c),
        derived={"lambda_kappa": lam, "j_kappa": j},
        phi=lambda mu: 1.0 - np.exp(-c * mu) / c,
        w=lambda mu: k0 - (k0 / c) * np.exp(-c * mu),
        potential=lambda mu: 0.5 * lam**2 * c**2 * np.exp(-2.0 * c * mu)
        + j * lam * c**2 * np.exp(-c * mu),
        structure=lambda mu: lam * c**2 * np.exp(-c * mu),
        ground_log=lambda mu: -lam * c**2 * mu - lam * np.exp(-c * mu),
        eps0=-0.5 * lam**2 * c**4,
        mu_window=_window(params, (-3.0, 12.0)),
        notes=(
            "printed exp(-c mu) coefficient j lambda lacks the factor c^2; "
            "the derived j lambda c^2 is stored",
        ),
    )


def coulomb(params: EntryParameters) -> CatalogEntry:
    a, b, c, k0 = params.a, params.b, params.c, params.k0
    _require(a != 0.0, "coulomb", "a must be nonzero")
    _require(
        abs(b * b - 4.0 * a * c) <= 1e-12 * max(1.0, b * b, abs(4.0 * a * c)),
        "coulomb",
        f"the entry requires b^2 = 4ac, got b^2={b * b}, 4ac={4.0 * a * c}",
    )
    _require(params.k1 == 0.0, "coulomb", "the entry requires k1 = 0")
    level = params.p * k0 / a - 1.0
    charge = -b * (level + 1.0) ** 2 / 2.0
    _require(level != -1.0, "coulomb", "l_kappa = -1 leaves no bound state")
    rate = charge / (level + 1.0)
    return CatalogEntry(
        name="coulomb",
        class_id=1,
        constraint="b^2=4ac, k1=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, a=a, b=b, c=c, k0=k0),
        phi_anchor=(1.0, -1.0 / a - b / (2.0 * a)),
        derived={"l_kappa": level, "Ze2": charge},
        phi=lambda mu: -1.0 / (a * mu) - b / (2.0 * a),
        w=lambda mu: -k0 / (a * mu) - b * k0 / (2.0 * a),
        potential=lambda mu: level * (level + 1.0) / (2.0 * mu**2) - charge / mu,
        structure=lambda mu: (level + 1.0) / mu**2,
        ground_log=lambda mu: (level + 1.0) * np.log(mu) - rate * mu,
        eps0=-0.5 * rate**2,
        mu_window=_window(params, (0.0, 10.0)),
        walls=(0.0,),
    )


def poschl_teller(params: EntryParameters) -> CatalogEntry:
    s, k0 = params.a, params.k0
    _require(s != 0.0, "poschl-teller", "a must be nonzero")
    _require(params.k1 == 0.0, "poschl-teller", "the entry requires k1 = 0")
    j = params.p * k0 / s
    return CatalogEntry(
        name="poschl-teller",
        class_id=1,
        constraint="a=-c, b=k1=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, a=-s, c=s, k0=k0),
        phi_anchor=(0.0, 0.0),
        derived={"j_kappa": j},
        phi=lambda mu: np.tanh(s * mu),
        w=lambda mu: k0 * np.tanh(s * mu),
        potential=lambda mu: -0.5 * s**2 * j * (j + 1.0) * _sech(s * mu) ** 2,
        structure=lambda mu: j * s**2 * _sech(s * mu) ** 2,
        ground_log=lambda mu: -j * np.log(np.cosh(s * mu)),
        eps0=-0.5 * s**2 * j**2,
        mu_window=_window(params, (-10.0, 10.0)),
    )


def eckart(params: EntryParameters) -> CatalogEntry:
    s, k0, k1 = params.a, params.k0, params.k1
    _require(s != 0.0, "eckart", "a must be nonzero")
    lam = params.p * k0 / s
    _require(lam != 0.0, "eckart", "lambda_kappa = (kappa+1) k0 / a must be nonzero")
    nu = params.p**2 * k0 * k1 / s**2
    return CatalogEntry(
        name="eckart",
        class_id=1,
        constraint="a=c, b=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, a=-s, c=s, k0=-k0, k1=k1),
        phi_anchor=(1.0 / s, 1.0 / math.tanh(1.0)),
        derived={"lambda_kappa": lam, "nu_kappa": nu},
        phi=lambda mu: _coth(s * mu),
        w=lambda mu: -k0 * _coth(s * mu) + k1,
        potential=lambda mu: 0.5 * s**2 * lam * (lam - 1.0) * _csch(s * mu) ** 2
        - nu * s**2 * _coth(s * mu),
        structure=lambda mu: lam * s**2 * _csch(s * mu) ** 2,
        ground_log=lambda mu: lam * np.log(np.sinh(s * mu)) - s * nu * mu / lam,
        eps0=-0.5 * s**2 * (lam**2 + nu**2 / lam**2),
        mu_window=_window(params, (0.0, 30.0)),
        walls=(0.0,),
        notes=(
            "printed ODE pattern a=c is the Rosen-Morse one; coth solves "
            "d(phi)/d(mu) = -a phi^2 + a",
            "ground factor sinh^lambda vanishes at the mu = 0 wall only for lambda > 0",
        ),
    )


def rosen_morse(params: EntryParameters) -> CatalogEntry:
    s, k0, k1 = params.a, params.k0, params.k1
    _require(s != 0.0, "rosen-morse", "a must be nonzero")
    lam = params.p * k0 / s
    _require(lam != 0.0, "rosen-morse", "lambda_kappa = (kappa+1) k0 / a must be nonzero")
    nu = params.p**2 * k0 * k1 / s**2
    return CatalogEntry(
        name="rosen-morse",
        class_id=1,
        constraint="a=c, b=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, a=-s, c=-s, k0=k0, k1=-k1),
        phi_anchor=(0.25 * math.pi / s, 1.0),
        derived={"lambda_kappa": lam, "nu_kappa": nu},
        phi=lambda mu: 1.0 / np.tan(s * mu),
        w=lambda mu: k0 / np.tan(s * mu) - k1,
        potential=lambda mu: 0.5 * s**2 * lam * (lam + 1.0) / np.sin(s * mu) ** 2
        - nu * s**2 / np.tan(s * mu),
        structure=lambda mu: -lam * s**2 / np.sin(s * mu) ** 2,
        ground_log=lambda mu: -lam * np.log(np.sin(s * mu)) + s * nu * mu / lam,
        eps0=0.5 * s**2 * (lam**2 - nu**2 / lam**2),
        mu_window=_window(params, (0.0, math.pi / abs(s))),
        walls=(0.0, math.pi / abs(s)),
        notes=(
            "<[eta~, eta~^dagger]> = -lambda a^2 csc^2 is negative for lambda > 0; "
            "the uncertainty bound uses the signed mean squared",
        ),
    )


def _manning_rosen_entry(
    name: str, params: EntryParameters, k0: float, notes: tuple
) -> CatalogEntry:
    b, k1, p = params.b, params.k1, params.p
    _require(b > 0.0, name, "the entry requires b > 0")
    big_j = p * k0
    _require(big_j != 0.0, name, "J_kappa = (kappa+1) k0 must be nonzero")
    lam = (2.0 * p * k1 / b + 1.0) * big_j
    rate = b * (lam / (2.0 * big_j) - 0.5)

    def ratio(mu):
        decay = np.exp(-b * mu)
        return decay / (1.0 - decay)

    def ratio_squared(mu):
        decay = np.exp(-b * mu)
        return decay**2 / (1.0 - decay) ** 2

    def log_gap(mu):
        return np.log(-np.expm1(-b * mu))

    return CatalogEntry(
        name=name,
        class_id=1,
        constraint="a=-1, b>0, c=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=1, a=-1.0, b=-b, k0=-k0, k1=k1),
        phi_anchor=(1.0 / b, b * math.exp(-1.0) / (1.0 - math.exp(-1.0))),
        derived={"J_kappa": big_j, "lambda_kappa": lam, "Ze2": b * lam / 2.0},
        phi=lambda mu: b * ratio(mu),
        w=lambda mu: -k0 * b * ratio(mu) + k1,
        potential=lambda mu: 0.5 * b**2 * big_j * (big_j - 1.0) * ratio_squared(mu)
        - 0.5 * b**2 * lam * ratio(mu),
        structure=lambda mu: big_j * b**2 * ratio(mu) / (-np.expm1(-b * mu)),
        ground_log=lambda mu: big_j * log_gap(mu) - rate * mu,
        eps0=-0.5 * rate**2,
        mu_window=_window(params, (0.0, 36.0)),
        walls=(0.0,),
        notes=notes,
    )


def manning_rosen(params: EntryParameters) -> CatalogEntry:
    return _manning_rosen_entry(
        "manning-rosen",
        params,
        params.k0,
        (
            "printed J(J-1) term carries e^(-b mu) instead of e^(-2 b mu) over (1-e^(-b mu))^2; "
            "the derived form is stored",
            "printed coherent-state phase constant lacks a factor b",
        ),
    )


def hulthen(params: EntryParameters) -> CatalogEntry:
    k0 = 1.0 / params.p
    _require(
        params.k0 in (0.0, k0) or math.isclose(params.k0, k0, rel_tol=1e-12),
        "hulthen",
        f"the entry fixes k0 = 1/(kappa+1) = {k0}",
    )
    entry = _manning_rosen_entry(
        "hulthen",
        params,
        k0,
        ("printed coherent-state phase constant lacks a factor b",),
    )
    return replace(entry, constraint="a=-1, b>0, c=0, J_kappa=1")


def radial_ho(params: EntryParameters) -> CatalogEntry:
    k0, k1, p = params.k0, params.k1, params.p
    level, omega = p * k0 - 1.0, p * k1
    return CatalogEntry(
        name="radial-ho",
        class_id=2,
        constraint="a=-1, b=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=2, a=-1.0, k0=-k0, k1=k1),
        phi_anchor=(1.0, 1.0),
        derived={"l_kappa": level, "omega_kappa": omega},
        phi=lambda mu: 1.0 / mu,
        w=lambda mu: -k0 / mu + k1 * mu,
        potential=lambda mu: 0.5 * omega**2 * mu**2 + level * (level + 1.0) / (2.0 * mu**2),
        structure=lambda mu: omega + (level + 1.0) / mu**2,
        ground_log=lambda mu: (level + 1.0) * np.log(mu) - 0.5 * omega * mu**2,
        eps0=omega * (level + 1.5),
        mu_window=_window(params, (0.0, 6.0)),
        walls=(0.0,) if k0 != 0.0 else (),
    )


def generalized_poschl_teller(params: EntryParameters) -> CatalogEntry:
    s, k0, k1, p = params.a, params.k0, params.k1, params.p
    _require(s != 0.0, "generalized-poschl-teller", "a must be nonzero")
    big_a, big_b = p * k0, p * k1
    m_kappa = p * (k0 + k1) / (2.0 * s) + 0.5
    lam = p * (k0 - k1) / (2.0 * s)
    return CatalogEntry(
        name="generalized-poschl-teller",
        class_id=2,
        constraint="a=-b",
        kappa=params.kappa,
        spec=ClassSpec(class_id=2, a=-s, b=s, k0=k0, k1=k1),
        phi_anchor=(0.0, 0.0),
        derived={
            "m_kappa": m_kappa,
            "lambda_kappa": lam,
            "Lambda_plus": big_a / s,
            "Lambda_minus": big_b / s,
        },
        phi=lambda mu: np.tanh(s * mu),
        w=lambda mu: k0 * np.tanh(s * mu) + k1 * _coth(s * mu),
        potential=lambda mu: -0.5 * big_a * (big_a + s) * _sech(s * mu) ** 2
        + 0.5 * big_b * (big_b + s) * _csch(s * mu) ** 2,
        structure=lambda mu: s * (big_a * _sech(s * mu) ** 2 - big_b * _csch(s * mu) ** 2),
        ground_log=lambda mu: -(big_a / s) * np.log(np.cosh(s * mu))
        - (big_b / s) * np.log(np.abs(np.sinh(s * mu))),
        eps0=-0.5 * (big_a + big_b) ** 2,
        mu_window=_window(params, (0.0, 18.0)),
        walls=(0.0,) if k1 != 0.0 else (),
    )


def scarf(params: EntryParameters) -> CatalogEntry:
    s, k0, k1, p = params.a, params.k0, params.k1, params.p
    _require(s != 0.0, "scarf", "a must be nonzero")
    nu, lam = p * k0 / s**2, p * k1 / s**2
    return CatalogEntry(
        name="scarf",
        class_id=3,
        constraint="a=b=d=1, c=0",
        kappa=params.kappa,
        spec=ClassSpec(class_id=3, a=1.0, b=1.0, d=s, k0=k0 / s, k1=-k1 / s),
        phi_anchor=(0.0, 0.0),
        derived={"nu_kappa": nu, "lambda_kappa": lam},
        phi=lambda mu: np.sinh(s * mu),
        w=lambda mu: (k0 / s) * np.tanh(s * mu) - (k1 / s) * _sech(s * mu),
        potential=lambda mu: 0.5 * s**2 * (lam**2 - nu**2 - nu) * _sech(s * mu) ** 2
        - 0.5 * s**2 * lam * (2.0 * nu + 1.0) * np.tanh(s * mu) * _sech(s * mu),
        structure=lambda mu: s**2
        * (nu * _sech(s * mu) ** 2 + lam * np.tanh(s * mu) * _sech(s * mu)),
        ground_log=lambda mu: -nu * np.log(np.cosh(s * mu))
        + lam * np.arctan(np.sinh(s * mu)),
        eps0=-0.5 * s**2 * nu**2,
        mu_window=_window(params, (-10.0, 10.0)),
        notes=(
            "printed ground factor exp(-lambda arctan sinh) has the wrong sign; "
            "exp(+lambda arctan sinh) is stored",
            "printed structure function halves both terms",
        ),
    )


def _fixture(eps0: float, tolerance: float = 1e-3, **parameters) -> Fixture:
    return Fixture(parameters=EntryParameters(**parameters), eps0=eps0, eigen_tolerance=tolerance)


BUILTIN_CATALOG: Dict[str, CatalogDefinition] = {
    definition.name: definition
    for definition in (
        CatalogDefinition(
            name="shifted-ho",
            title="Shifted harmonic oscillator",
            class_id=1,
            constraint="a=b=0, c=1",
            domain_kind="full-line",
            derive=shifted_ho,
            fixtures=(
                _fixture(1.0, 1e-4, kappa=1.0, k0=1.0, k1=0.0),
                _fixture(1.5, 1e-4, kappa=2.0, k0=1.0, k1=0.0),
            ),
        ),
        CatalogDefinition(
            name="morse",
            title="Morse",
            class_id=1,
            constraint="a=0, c=-b, k1=0",
            domain_kind="full-line",
            derive=morse,
            fixtures=(
                _fixture(-2.0, 5e-3, kappa=1.0, k0=1.0, c=1.0),
                _fixture(-4.5, 5e-3, kappa=2.0, k0=1.0, c=1.0),
            ),
        ),
        CatalogDefinition(
            name="coulomb",
            title="Radial Coulomb",
            class_id=1,
            constraint="b^2=4ac, k1=0",
            domain_kind="half-line",
            derive=coulomb,
            fixtures=(_fixture(-4.5, 1e-2, kappa=2.0, k0=1.0, a=1.0, b=-2.0, c=1.0),),
        ),
        CatalogDefinition(
            name="poschl-teller",
            title="Poschl-Teller",
            class_id=1,
            constraint="a=-c, b=k1=0",
            domain_kind="full-line",
            derive=poschl_teller,
            fixtures=(
                _fixture(-2.0, 5e-3, kappa=1.0, k0=1.0, a=1.0),
                _fixture(-2.0, 5e-3, kappa=2.0, k0=2.0 / 3.0, a=1.0),
            ),
        ),
        CatalogDefinition(
            name="eckart",
            title="Eckart",
            class_id=1,
            constraint="a=c, b=0",
            domain_kind="half-line",
            derive=eckart,
            fixtures=(
                _fixture(-0.625, kappa=1.0, k0=0.25, k1=0.5, a=0.5),
                _fixture(-0.625, kappa=2.0, k0=1.0 / 6.0, k1=1.0 / 3.0, a=0.5),
            ),
        ),
        CatalogDefinition(
            name="rosen-morse",
            title="Rosen-Morse (trigonometric)",
            class_id=1,
            constraint="a=c, b=0",
            domain_kind="interval",
            derive=rosen_morse,
            fixtures=(
                _fixture(1.5, kappa=1.0, k0=-1.0, k1=-0.5, a=1.0),
                _fixture(3.375, kappa=2.0, k0=-1.0, k1=-0.5, a=1.0),
            ),
        ),
        CatalogDefinition(
            name="manning-rosen",
            title="Manning-Rosen",
            class_id=1,
            constraint="a=-1, b>0, c=0",
            domain_kind="half-line",
            derive=manning_rosen,
            fixtures=(
                _fixture(-0.125, kappa=1.0, k0=1.0, k1=0.25, b=0.25),
                _fixture(-0.125, kappa=2.0, k0=2.0 / 3.0, k1=1.0 / 6.0, b=0.25),
            ),
        ),
        CatalogDefinition(
            name="hulthen",
            title="Hulthen",
            class_id=1,
            constraint="a=-1, b>0, c=0, J_kappa=1",
            domain_kind="half-line",
            derive=hulthen,
            fixtures=(
                _fixture(-0.125, kappa=1.0, k1=0.25, b=0.5),
                _fixture(-0.125, kappa=2.0, k1=1.0 / 6.0, b=0.5),
            ),
        ),
        CatalogDefinition(
            name="radial-ho",
            title="Radial harmonic oscillator",
            class_id=2,
            constraint="a=-1, b=0",
            domain_kind="half-line",
            derive=radial_ho,
            fixtures=(
                _fixture(5.0, kappa=1.0, k0=1.0, k1=1.0),
                _fixture(5.0, kappa=2.0, k0=2.0 / 3.0, k1=2.0 / 3.0),
            ),
        ),
        CatalogDefinition(
            name="generalized-poschl-teller",
            title="Generalized Poschl-Teller",
            class_id=2,
            constraint="a=-b",
            domain_kind="half-line",
            derive=generalized_poschl_teller,
            fixtures=(
                _fixture(-0.5, kappa=1.0, k0=1.0, k1=-0.5, a=0.5),
                _fixture(-0.5, kappa=2.0, k0=2.0 / 3.0, k1=-1.0 / 3.0, a=0.5),
            ),
        ),
        CatalogDefinition(
            name="scarf",
            title="Scarf",
            class_id=3,
            constraint="a=b=d=1, c=0",
            domain_kind="full-line",
            derive=scarf,
            fixtures=(
                _fixture(-2.0, 5e-3, kappa=1.0, k0=1.0, k1=0.5, a=1.0),
                _fixture(-2.0, 5e-3, kappa=2.0, k0=2.0 / 3.0, k1=1.0 / 3.0, a=1.0),
            ),
        ),
    )
}


class BuiltinCatalogRepository(CatalogRepository):
    """The eleven bundled systems, in catalog order."""

    def get(self, name: str) -> CatalogDefinition:
        try:
            return BUILTIN_CATALOG[name]
        except KeyError:
            raise ConfigError(
                f"unknown catalog entry {name!r}; expected one of {', '.join(BUILTIN_CATALOG)}"
            ) from None

    def names(self) -> Sequence[str]:
        return tuple(BUILTIN_CATALOG)
