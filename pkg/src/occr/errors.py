"""Exception hierarchy shared across the package."""


class OccrError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(OccrError):
    """A wallet record violates a domain invariant.

    ``record_id`` names the offending wallet, loan, or transaction.
    """

    def __init__(self, record_id: str, message: str = ""):
        self.record_id = record_id
        self.wallet_id: str | None = None
        super().__init__(f"{record_id}: {message}" if message else record_id)


class NegativeAmount(ValidationError):
    pass


class MissingCloseDate(ValidationError):
    pass


class BorrowCapViolated(ValidationError):
    pass


class InvalidRecord(ValidationError):
    pass


class UnknownAsset(OccrError):
    def __init__(self, asset_id: str, wallet_id: str | None = None):
        self.asset_id = asset_id
        self.wallet_id = wallet_id
        where = f" (wallet {wallet_id})" if wallet_id else ""
        super().__init__(f"unknown asset {asset_id!r}{where}")


class ZeroSigmaMax(OccrError):
    pass


# Raised by estimators when the evidence they need is absent; callers substitute
# the no-history policy.
class NoEligibleLoans(OccrError):
    pass


class NoTransactions(OccrError):
    pass


class SingleLoan(OccrError):
    pass


class InsufficientLoans(OccrError):
    pass


class NoOpenPositions(OccrError):
    pass


class ShapeTooSmall(OccrError):
    pass


class ScaleOrderViolated(OccrError):
    pass


class ThresholdOutOfRange(OccrError):
    pass


class ScaleTooSmall(OccrError):
    pass


class InsufficientSizes(OccrError):
    pass


class ParseError(OccrError):
    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        self.line = line
        self.offset = offset
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


class SchemaVersionMismatch(OccrError):
    pass


class DuplicateAsset(OccrError):
    def __init__(self, asset_id: str):
        self.asset_id = asset_id
        super().__init__(f"duplicate asset {asset_id!r}")
