import csv
import json
import logging
import os
from typing import Dict, Iterable, List, Sequence, Tuple

logger = logging.getLogger(__name__)


def header_line(**items) -> str:
    """``# key=value ...`` comment line; dict values are written as compact JSON."""
    parts = []
    for key, value in items.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, separators=(',', ':'))
        parts.append('{}={}'.format(key, value))
    return '# ' + ' '.join(parts)


def _format(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvOutfile:
    """CSV artifact whose first line is a ``#`` comment carrying config and seed."""

    def __init__(self, filename: str, columns: Sequence[str], header: str = '#') -> None:
        """
        Args:
            filename (str): Output file.
            columns (sequence of str): Column names, written after the comment line.
            header (str): Comment line, see ``header_line``.
        """
        if not header.startswith('#'):
            header = '# ' + header
        self.filename = filename
        self.columns = list(columns)
        self.header = header

    def initialize(self) -> None:
        """Create the file, overwriting any existing content, and write the header."""
        try:
            directory = os.path.dirname(self.filename)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(self.filename, 'w', newline='') as outfile:
                outfile.write(self.header + '\n')
                csv.writer(outfile).writerow(self.columns)
        except IOError as e:
            logger.error("Failed to initialize output file '{}': {}".format(self.filename, e))
            raise

    def write_rows(self, rows: Iterable) -> None:
        """Append rows given as sequences (column order) or dicts."""
        try:
            with open(self.filename, 'a', newline='') as outfile:
                writer = csv.writer(outfile)
                for row in rows:
                    if isinstance(row, dict):
                        row = [row[c] for c in self.columns]
                    writer.writerow([_format(v) for v in row])
        except IOError as e:
            logger.error('Error writing to file {}: {}'.format(self.filename, e))
            raise


def write_csv(filename: str, columns: Sequence[str], rows: Iterable, header: str = '#') -> str:
    out = CsvOutfile(filename, columns, header)
    out.initialize()
    out.write_rows(rows)
    logger.info('wrote {}'.format(filename))
    return filename


def read_csv(filename: str) -> Tuple[str, List[Dict[str, str]]]:
    """Read a CSV artifact back.

    Returns:
        tuple: (comment line, list of row dicts with string values)
    """
    with open(filename, newline='') as infile:
        header = infile.readline().rstrip('\n')
        rows = list(csv.DictReader(infile))
    return header, rows


def parse_header(header: str) -> Dict[str, str]:
    items = {}
    for token in header.lstrip('#').split():
        if '=' in token:
            key, value = token.split('=', 1)
            items[key] = value
    return items
