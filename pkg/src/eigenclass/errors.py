"""Exception hierarchy shared by every stage of the pipeline."""


class EigenclassError(Exception):
    """Base class; the CLI maps any subclass to exit code 1."""


class ImageFileNotFound(EigenclassError, FileNotFoundError):
    pass


class UnsupportedFormat(EigenclassError):
    pass


class CorruptImage(EigenclassError):
    pass


class EmptyImage(EigenclassError):
    pass


class ManifestParseError(EigenclassError):
    pass


class InvalidSpec(EigenclassError):
    pass


class CoefficientCountOutOfRange(EigenclassError):
    pass


class EmptyInput(EigenclassError):
    pass


class DimensionMismatch(EigenclassError):
    pass


class LengthMismatch(EigenclassError):
    pass


class NotSymmetric(EigenclassError):
    pass


class ConvergenceFailure(EigenclassError):
    pass


class DegenerateData(EigenclassError):
    pass


class IndexOutOfRange(EigenclassError):
    pass


class KOutOfRange(EigenclassError):
    pass


class EmptyModel(EigenclassError):
    pass


class EmptyClass(EigenclassError):
    pass


class UnknownLabel(EigenclassError):
    pass


class EmptyMatrix(EigenclassError):
    pass


class ModelFormatError(EigenclassError):
    pass
