"""Exception types shared across the package."""


class ZdsecError(Exception):
    pass


class AlphabetMismatch(ZdsecError, ValueError):
    """A code and a model disagree on the alphabet size."""


class NoCodewordPrefix(ZdsecError, ValueError):
    """No codeword of the code is a prefix of the given bits."""


class Desync(ZdsecError):
    """The decoder lost synchronization with the encoder.

    Raised when no valid codeword appears within the bits available to a
    stage. With a complete code and synchronized key replicas this cannot
    happen, so it always signals corrupted state (a shifted key, a
    truncated stream, ...).
    """


class StateSpaceTooLarge(ZdsecError):
    """An exact enumeration would exceed the configured state limit."""


class SWDecodeFailure(ZdsecError):
    """Slepian-Wolf decoding gave up before finding a sequence in the bin."""


class InfeasibleTarget(ZdsecError, ValueError):
    """A requested (D, h) target lies outside the achievable region."""


class ConfigError(ZdsecError, ValueError):
    """An experiment configuration is missing fields or points at missing files."""
