"""Exact orbital integrals on Herm(V_2) over F_q((w)) and fundamental-lemma checks."""

import json as _json

from ._core import (
    FieldConfig,
    LaurentQPoly,
    LocalElement,
    QPoly,
    RelflError,
    StableClassParams,
    __version__,
    endoscopic_so_closed,
    kappa_character,
    kappa_orb_closed,
    orb_basic_closed,
    orb_phi_closed,
    orbit_case,
    orbital_integral,
    phi_closed,
    pushforward,
    relative_orbital_integral,
    stable_class_grid,
    transfer_factor,
)
from ._core import fl_verify_json as _fl_verify_json


def fl_verify(params, config, timings=False):
    """Fundamental-lemma report for a base point, as a dict."""
    return _json.loads(_fl_verify_json(params, config, timings))


__all__ = [
    "FieldConfig",
    "LaurentQPoly",
    "LocalElement",
    "QPoly",
    "RelflError",
    "StableClassParams",
    "__version__",
    "endoscopic_so_closed",
    "fl_verify",
    "kappa_character",
    "kappa_orb_closed",
    "orb_basic_closed",
    "orb_phi_closed",
    "orbit_case",
    "orbital_integral",
    "phi_closed",
    "pushforward",
    "relative_orbital_integral",
    "stable_class_grid",
    "transfer_factor",
]
