#!/usr/bin/python3


class LaminateCollocException(Exception):
    """
    Base exception of the package
    """

    def __init__(self, msg=""):
        super().__init__(msg)
        self.message = msg

    def __str__(self):
        return self.message


class DomainException(LaminateCollocException):
    """
    Evaluation point outside the knot range or outside the box
    """

    def __init__(self, value, lower, upper):
        super().__init__(
            "Point {} is outside the domain [{}, {}]".format(value, lower, upper)
        )
        self.value = value
        self.lower = lower
        self.upper = upper


class RegularityException(LaminateCollocException):
    """
    Basis is not smooth enough for the requested derivatives
    """

    def __init__(self, required, available, direction=None):
        where = " in direction {}".format(direction) if direction is not None else ""
        super().__init__(
            "C^{} regularity required{}, basis only has C^{}".format(
                required, where, available
            )
        )
        self.required = required
        self.available = available
        self.direction = direction


class RecoveryException(RegularityException):
    """
    Stress recovery requested on a too irregular in-plane basis
    """


class MaterialException(LaminateCollocException):
    """
    Engineering constants that do not give an admissible stiffness
    """


class HomogenizationException(LaminateCollocException):
    """
    Homogenized stiffness is not symmetric positive definite
    """


class NonSymmetricLayupException(HomogenizationException):
    """
    Single-element homogenization only holds for mirror-symmetric stacks
    """

    def __init__(self):
        super().__init__(
            "Layup is not symmetric about the mid-plane, "
            "homogenized single-element model is not applicable"
        )


class AssemblyException(LaminateCollocException):
    """
    Conflicting boundary data at a collocation point shared by faces
    """


class SolverException(LaminateCollocException):
    """
    Singular or unsolvable linear system
    """


class OracleException(LaminateCollocException):
    """
    Reference solution failed its consistency checks
    """


class ConfigException(LaminateCollocException):
    """
    Invalid case or sweep configuration
    """


class CaseException(LaminateCollocException):
    """
    Module error raised while running a benchmark case
    """

    def __init__(self, label, cause):
        super().__init__("[{}] {}: {}".format(label, type(cause).__name__, cause))
        self.label = label
        self.cause = cause


class NumericalWarning(UserWarning):
    """
    Non fatal numerical diagnostic
    """
