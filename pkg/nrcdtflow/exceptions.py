"""
Root exception for nrcdtflow.

Domain modules define their own subclasses next to the code that raises them.
"""


class NrcdtFlowError(Exception):
    """Base class for every error raised by nrcdtflow"""
    pass
