"""
    Exceptions
"""

from typing import Optional


class GnnTransferException(Exception):
    """Base exception class"""


class InvalidInputException(GnnTransferException):
    """Error caused by arguments outside of an operation's domain"""


class InvalidDatasetException(GnnTransferException):
    """Error caused by a malformed dataset or checkpoint on disk"""


class UnsupportedVersionException(InvalidDatasetException):
    """Error caused by a dataset or checkpoint written by an incompatible format version"""


class InvalidConfigException(GnnTransferException):
    """Error caused by an invalid configuration file"""


class GenerationException(GnnTransferException):
    """Error caused by a generator producing an unusable graph"""


class UndefinedMetricException(GnnTransferException):
    """Error caused by evaluating a metric where it is not defined"""


class NumericException(GnnTransferException):
    """Error caused by non-finite values"""


class DegenerateSampleException(GnnTransferException):
    """Error caused by samples a significance test cannot be computed on"""


class ProtocolException(GnnTransferException):
    """Error caused by an invalid transfer protocol setup"""


class AggregationException(GnnTransferException):
    """Error caused by runs that can't be aggregated together"""


class CalibrationException(GnnTransferException):
    """Error caused by a calibration target that could not be reached"""

    def __init__(self, message: str, closest: Optional[float] = None):
        super().__init__(message)
        self.closest = closest
