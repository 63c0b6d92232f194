"""SU(2)-invariant hyperinvariant tensor networks on hyperbolic tilings."""

from .hit import HitSpec, make_left_right, make_l_shift, make_star, verify_all
from .network import NetworkState, assemble
from .tiling import BoundaryRegion, TilingGraph, build_tiling, minimal_cut

__all__ = [
    "BoundaryRegion",
    "HitSpec",
    "NetworkState",
    "TilingGraph",
    "assemble",
    "build_tiling",
    "make_left_right",
    "make_l_shift",
    "make_star",
    "minimal_cut",
    "verify_all",
]
__version__ = "0.1.0"
