"""Exception types raised by ellipq."""


class EllipqError(Exception):
    pass


class ConfigError(EllipqError, ValueError):
    pass


class PoleProximity(EllipqError, ArithmeticError):
    pass


class UnreachableWeight(EllipqError, ValueError):
    pass


class CombinatorialOverflow(EllipqError):
    pass


class DepthLimit(EllipqError):
    pass


class ContourError(EllipqError, ArithmeticError):
    pass


class AdaptivityFailure(EllipqError, ArithmeticError):
    pass


class SingularConfiguration(EllipqError, ValueError):
    pass


class SingularPairing(EllipqError, ArithmeticError):
    pass


class MethodUnavailable(EllipqError, ValueError):
    pass


class InvarianceViolated(EllipqError, ArithmeticError):
    pass


class ConvergenceFailure(EllipqError, ArithmeticError):
    pass


class JacobianSingular(ConvergenceFailure):
    pass


class SolutionDeficit(EllipqError):
    pass


class UnknownCheck(EllipqError, KeyError):
    pass
