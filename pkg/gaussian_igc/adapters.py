from abc import ABCMeta, abstractmethod
import csv
import json
import logging
from functools import wraps
from typing import Any, Dict, Iterable, Mapping, Sequence, TextIO

from .constants import OutputFormat
from .errors import ConfigError
from .reports import emit


# decorator to make sure the output stream is still writable
def require_open_stream(f):
    @wraps(f)
    def assert_stream(self, *args, **kwargs):
        if self.stream.closed:
            self.logger.warning(f"{self.__class__.__name__}.{f.__name__}: output stream is closed, aborting")
        else:
            return f(self, *args, **kwargs)
    return assert_stream


def format_cell(value: Any) -> str:
    """Shortest round-trip text for floats, empty for missing cells."""
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


class OutputAdapter(metaclass=ABCMeta):
    """Output adapter abstract base class. Extend this to let EntropicMotionToolkit
    write its tables and reports to another format."""
    format: OutputFormat = None

    def __init__(self, stream: TextIO, logger: logging.Logger = None) -> None:
        self.stream = stream
        self.logger = logger or logging.getLogger(__name__)

    @abstractmethod
    def write_table(self, headers: Sequence[str], rows: Iterable[Mapping[str, Any]],
                    footer: Mapping[str, Any] = None) -> None:
        pass

    @abstractmethod
    def write_report(self, report) -> None:
        pass

    @require_open_stream
    def flush(self) -> None:
        self.stream.flush()


class CsvOutputAdapter(OutputAdapter):
    """One header line, one line per row; footer entries as '# key,value' lines."""
    format = OutputFormat.CSV

    @require_open_stream
    def write_table(self, headers, rows, footer=None) -> None:
        writer = csv.DictWriter(self.stream, fieldnames=list(headers), lineterminator='\n')
        writer.writeheader()
        count = 0
        for row in rows:
            writer.writerow({key: format_cell(row.get(key)) for key in headers})
            count += 1
        for key, value in (footer or {}).items():
            self.stream.write(f"# {key},{format_cell(value)}\n")
        self.logger.debug(f"CsvOutputAdapter.write_table: {count} rows, columns {list(headers)}")

    @require_open_stream
    def write_report(self, report) -> None:
        raise ConfigError(f"CsvOutputAdapter.write_report: {type(report).__name__} is only emitted as json")


class JsonOutputAdapter(OutputAdapter):
    format = OutputFormat.JSON

    @require_open_stream
    def write_table(self, headers, rows, footer=None) -> None:
        document: Dict[str, Any] = {
            'columns': list(headers),
            'rows': [[row.get(key) for key in headers] for row in rows],
        }
        if footer:
            document['footer'] = dict(footer)
        self.stream.write(json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + '\n')

    @require_open_stream
    def write_report(self, report) -> None:
        self.stream.write(emit(report))


def adapter_for(output_format: OutputFormat, stream: TextIO, logger: logging.Logger = None) -> OutputAdapter:
    if output_format is OutputFormat.JSON:
        return JsonOutputAdapter(stream, logger)
    return CsvOutputAdapter(stream, logger)
