"""Step 1: keep or drop whole feature groups."""

import logging
from typing import Mapping, Sequence

import numpy as np

from .base import ColumnSelector

logger = logging.getLogger(__name__)


class GroupwiseSelector(ColumnSelector):
    """Keep the features whose group activator is on.

    Groups missing from ``activators`` stay on. If every feature is dropped, all
    features are kept and ``fallback_`` is set.
    """

    kind = "groupwise_selection"

    def __init__(self, group_tags: Sequence[str], activators: Mapping[str, bool]):
        super().__init__()
        self.group_tags = tuple(group_tags)
        self.activators = dict(activators)

    def _fit(self, X, y):
        if len(self.group_tags) != X.shape[1]:
            raise ValueError(
                f"{len(self.group_tags)} group tags for {X.shape[1]} feature columns"
            )
        mask = np.array([bool(self.activators.get(tag, True)) for tag in self.group_tags])
        self._keep(mask)
        if self.fallback_:
            logger.debug("Group-wise selection switched off every group; keeping all features")

    def _state(self):
        state = super()._state()
        state["groups_on"] = sorted(g for g, on in self.activators.items() if on)
        return state
