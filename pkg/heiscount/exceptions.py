class InvalidDiscriminantException(ValueError):
    pass


class FieldMismatchException(ValueError):
    pass


class ConstraintViolationException(ValueError):
    pass


class ZeroLatticeException(ValueError):
    pass


class DegenerateGeometryException(ValueError):
    pass


class NotAChainException(ValueError):
    pass


class InfiniteChainException(ValueError):
    pass


class UnsupportedFieldException(ValueError):
    pass


class GuardExceededException(ValueError):
    pass


class ClassificationException(ValueError):
    def __init__(self, message, classification=None):
        super().__init__(message)
        self.classification = classification


class QuadratureException(Exception):
    def __init__(self, message, abserr=None):
        super().__init__(message)
        self.abserr = abserr
