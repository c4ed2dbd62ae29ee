"""Exception hierarchy shared by all mfderive modules."""

from __future__ import annotations


class MfderiveError(Exception):
    """Base class for every error raised on purpose by mfderive."""

    category = "error"


class MissingAssignment(MfderiveError, KeyError):
    category = "eval"

    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"no value assigned to {symbol}")

    def __str__(self):
        return self.args[0]


class RateSyntaxError(MfderiveError, ValueError):
    """Malformed or ill-typed rate expression; ``pos`` is a 0-based offset."""

    category = "parse"

    def __init__(self, message: str, pos: int | None = None, source: str | None = None):
        self.message = message
        self.pos = pos
        self.source = source
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{message}{where}")


class ModelError(MfderiveError, ValueError):
    """Model file or model definition violates the schema; ``path`` is a JSON path."""

    category = "model"

    def __init__(self, message: str, path: str = "$"):
        self.message = message
        self.path = path
        super().__init__(f"{path}: {message}")


class SexpError(MfderiveError, ValueError):
    category = "sexp"


class ScalingObstruction(MfderiveError, ArithmeticError):
    """A coefficient below the requested power of h does not vanish."""

    category = "scaling"

    def __init__(self, power: int, coefficient, species: str | None = None):
        self.power = power
        self.coefficient = coefficient
        self.species = species
        who = f" for species {species}" if species else ""
        super().__init__(
            f"nonzero coefficient of h^{power}{who}: {coefficient.to_text()}"
        )


class UnlistedFunction(MfderiveError, ValueError):
    category = "integrate"


class NotInDiffusionForm(MfderiveError, ValueError):
    """Right-hand side is not of the form d_v(D(c) d_v c); carries the residual."""

    category = "diffusion"

    def __init__(self, residual, reason: str = "residual does not vanish"):
        self.residual = residual
        super().__init__(f"not in diffusion form: {reason}")
