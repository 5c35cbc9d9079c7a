"""Shared exception types."""


class CapacityError(Exception):
    """An oracle-scale engine was asked to exceed its configured capacity."""


class ReasoningError(Exception):
    """A query refers to names the knowledge base does not declare."""
