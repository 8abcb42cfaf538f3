"""Exception types raised across the package."""


class ProtCogenError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(ProtCogenError, ValueError):
    pass


class NearAntipodalError(ProtCogenError, ValueError):
    """Rotation angle too close to pi for a unique logarithm."""


class TimeSingularityError(ProtCogenError, ValueError):
    """Vector field evaluated too close to t = 1."""


class DegenerateGeometryError(ProtCogenError, ValueError):
    pass


class MissingAtomError(ProtCogenError, KeyError):
    def __init__(self, atom, residue=None):
        self.atom = atom
        self.residue = residue
        where = f" in residue {residue}" if residue is not None else ""
        super().__init__(f"missing atom {atom!r}{where}")

    def __str__(self):
        return self.args[0]


class ShapeError(ProtCogenError, ValueError):
    pass


class PDBParseError(ProtCogenError, ValueError):
    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmptyComplexError(ProtCogenError, ValueError):
    pass


class NoInterfaceError(ProtCogenError, ValueError):
    pass


class ContractError(ProtCogenError, RuntimeError):
    """A denoiser returned output violating the sampler's contract."""
