"""Stochastic-geometry toolkit for cooperative ISAC networks.

Localization CRLBs (AOA / TOF / hybrid), cooperative communication rate,
their closed-form approximations and the rate-CRLB boundary under
antenna-to-BS allocation.
"""

from isac_netsim.params import (
    Fim2,
    McEstimate,
    NetworkRealization,
    SystemParams,
    validate,
    zeta_a_sq,
    zeta_a_tilde_sq,
    zeta_r_sq,
    zeta_r_tilde_sq,
)

__version__ = "0.1.0"

__all__ = [
    "Fim2",
    "McEstimate",
    "NetworkRealization",
    "SystemParams",
    "validate",
    "zeta_a_sq",
    "zeta_a_tilde_sq",
    "zeta_r_sq",
    "zeta_r_tilde_sq",
    "__version__",
]
