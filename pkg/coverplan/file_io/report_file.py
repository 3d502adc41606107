#!/usr/bin/env python3
import json
from pathlib import Path
from typing import Optional, Union

from ..errors import ParseError
from .shared import smart_open_file


def write_report(report: dict, file_output: Union[str, Path]):
    """
    Write a JSON report with sorted keys. A ".gz" or ".bz2" suffix compresses the file.

    :param report:  The report dict. It must carry a "schema" field.
    """
    assert "schema" in report, "A report needs a schema field."
    with smart_open_file(file_output, "w") as fo:
        json.dump(report, fo, indent=2, sort_keys=True)
        fo.write("\n")


def read_report(file_input: Union[str, Path], schema: Optional[str] = None) -> dict:
    """
    Read a JSON report.

    :param schema:  The expected schema, e.g. "coverplan-report/1". None accepts any.
    :raises ParseError: if the file is not JSON or has another schema.
    """
    try:
        with smart_open_file(file_input, "r") as fi:
            report = json.load(fi)
    except (OSError, ValueError) as e:
        raise ParseError(f"Failed to read the report {file_input}: {e}") from e
    if not isinstance(report, dict) or (schema is not None and report.get("schema") != schema):
        raise ParseError(f"{file_input} is not a {schema} report.")
    return report
