"""Exception hierarchy shared across the package."""


class LogicSynthError(Exception):
    """Base class for every error raised by this package."""


# generators
class UnknownFamily(LogicSynthError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class UnsupportedLanguage(LogicSynthError, ValueError):
    pass


class UniquenessExhausted(LogicSynthError):
    """No unique-answer instance was found within the attempt bound."""


class NoSolution(LogicSynthError):
    pass


class MultipleSolutions(LogicSynthError):
    pass


class TooLarge(LogicSynthError):
    """Instance exceeds the brute-force oracle's documented bound."""


# templating
class TemplateError(LogicSynthError):
    pass


class ArityMismatch(TemplateError):
    pass


class LanguageMismatch(TemplateError):
    pass


class ResidualMarker(TemplateError):
    pass


class NoTemplateForLanguage(TemplateError):
    pass


# model adapter
class AdapterError(LogicSynthError):
    pass


class TransportError(AdapterError):
    pass


class Timeout(TransportError):
    pass


class AuthMissing(AdapterError):
    pass


# calibration
class ProbeInconclusive(LogicSynthError):
    """Every probe call failed, so no success rate can be computed."""


class NonMonotoneResponse(LogicSynthError):
    pass


class AnchorInversion(LogicSynthError, ValueError):
    pass


# rewards
class MethodKindMismatch(LogicSynthError, ValueError):
    pass


class SOutOfRange(LogicSynthError, ValueError):
    pass


# grpo simulator
class EmptyGroup(LogicSynthError, ValueError):
    pass


class DivergedPolicy(LogicSynthError):
    pass


# dataset io
class DuplicateId(LogicSynthError):
    pass


class MalformedLine(LogicSynthError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed record at line {line_no}" + (f": {reason}" if reason else ""))
