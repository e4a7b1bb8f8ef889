"""Ordinal maximin-share allocation of indivisible goods."""

from .core import Allocation, Instance, OrderingMaps, order_instance, pad_with_dummies, unorder_allocation
from .covering import (
    CoverResult,
    bbfs,
    bbfs_allocation,
    bidirectional_bag_filling,
    cover_opt_exact,
    cover_share,
    ell_approx_allocation,
    unidirectional_bag_filling,
)
from .lone_divider import is_l_balanced, lone_divider, ordinal_d, solve_ordinal
from .matching import AcceptabilityGraph, envy_free_matching
from .mms import (
    InstanceTooLarge,
    ScaledValuation,
    greedy_lower_bound,
    mms_bounds,
    mms_exact,
    proportional_share,
    scale_to_mms,
)

__all__ = [
    "AcceptabilityGraph",
    "Allocation",
    "CoverResult",
    "Instance",
    "InstanceTooLarge",
    "OrderingMaps",
    "ScaledValuation",
    "bbfs",
    "bbfs_allocation",
    "bidirectional_bag_filling",
    "cover_opt_exact",
    "cover_share",
    "ell_approx_allocation",
    "envy_free_matching",
    "greedy_lower_bound",
    "is_l_balanced",
    "lone_divider",
    "mms_bounds",
    "mms_exact",
    "order_instance",
    "ordinal_d",
    "pad_with_dummies",
    "proportional_share",
    "scale_to_mms",
    "solve_ordinal",
    "unidirectional_bag_filling",
    "unorder_allocation",
]
