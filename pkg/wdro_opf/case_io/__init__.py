"""
This package reads network case files and exposes the immutable network model
and the admittance structures derived from it. Two formats are understood: a
documented subset of the MATPOWER .m format (with extension sections for wind
farms and reserve prices) and a native JSON schema.
"""

from wdro_opf import WdroOpfError


class CaseParseError(WdroOpfError):
    """Raised when a case file cannot be read. The line number and field name
    are attached when they are known so the user can find the offending entry.
    """

    def __init__(self, message: str, line: int = None, field: str = None):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f'line {line}')
        if field is not None:
            location.append(f'field {field}')
        if location:
            message = f"{', '.join(location)}: {message}"
        super().__init__(message)


class CaseValidationError(WdroOpfError):
    """Raised when a case parses but violates one of the network invariants"""

    def __init__(self, invariant: str, message: str):
        self.invariant = invariant
        super().__init__(f'{invariant}: {message}')


# pylint: disable=wrong-import-position
from wdro_opf.case_io.network import Branch, Bus, Generator, Network, WindFarm, scale_wind
from wdro_opf.case_io.admittance import AdmittanceSet, build_admittance
from wdro_opf.case_io.readers import case_hash, load_case, parse_case, serialize_case

__all__ = [
    'AdmittanceSet', 'Branch', 'Bus', 'CaseParseError', 'CaseValidationError',
    'Generator', 'Network', 'WindFarm', 'build_admittance', 'case_hash', 'load_case',
    'parse_case', 'scale_wind', 'serialize_case',
]
