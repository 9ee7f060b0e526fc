"""
Tests for the console and JSON log formatters
"""

import json
import logging

from logger import ColoredFormatter, JSONFormatter


def _record(**extra):
    record = logging.makeLogRecord({
        "name": "services.sweep_runner", "levelname": "INFO", "levelno": logging.INFO,
        "msg": "sweep complete", "args": (),
    })
    record.__dict__.update(extra)
    return record


def test_console_line_carries_context():
    """Test that the console line appends extra context as key=value."""
    line = ColoredFormatter().format(_record(rows=12, duration_ms=3.5))
    assert "sweep complete" in line
    assert line.endswith("duration_ms=3.5 rows=12")


def test_console_line_without_context():
    """Test that the console line ends at the message without context."""
    line = ColoredFormatter().format(_record())
    assert line.endswith("services.sweep_runner | sweep complete")


def test_json_record_fields():
    """Test that JSON records carry the standard and extra fields."""
    payload = json.loads(JSONFormatter("%(message)s").format(_record(rows=12)))
    assert payload["message"] == "sweep complete"
    assert payload["level"] == "INFO"
    assert payload["logger"] == "services.sweep_runner"
    assert payload["rows"] == 12
