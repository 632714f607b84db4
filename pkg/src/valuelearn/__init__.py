"""Valuation functions over item bundles: evaluation, class checks and learners."""

from .itemset import ItemSet
from .valuations import (OXS, XOS, BudgetedAdditive, ExplicitTable, GoemansRank, Linear,
                         UnitDemand, Valuation, evaluate)

__all__ = ["ItemSet", "Valuation", "Linear", "UnitDemand", "XOS", "OXS", "BudgetedAdditive",
           "GoemansRank", "ExplicitTable", "evaluate"]
__version__ = "0.1.0"
