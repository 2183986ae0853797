# -*- coding: utf-8 -*-
"""Exception hierarchy shared by the library and the CLI."""


class CommunityExploreError(Exception):
    """Base class for every error raised by community_explore."""


class InvalidInstanceError(CommunityExploreError, ValueError):
    """Bad community sizes, indices, allocations or exploration states."""


class SizeGuardError(CommunityExploreError, RuntimeError):
    """An exhaustive oracle refused an input that is too large to enumerate."""

    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f"{what}: {size} exceeds the limit of {limit}")
        self.what = what
        self.size = size
        self.limit = limit


class UnsupportedBudgetError(CommunityExploreError, ValueError):
    """The requested budget is outside the range an operation supports."""


class EstimatorVariantError(CommunityExploreError, TypeError):
    """An update discipline was applied to a state of another variant."""


class ConfigError(CommunityExploreError, ValueError):
    """The experiment configuration is malformed or contradictory."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
