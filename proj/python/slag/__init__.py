"""Python access to the singular special Lagrangian constructions.

Reports come back as plain dictionaries. Rational coefficients come back as
``fractions.Fraction``.
"""

import json
from fractions import Fraction

from . import _core
from ._core import (
    Error,
    Handle,
    ParameterError,
    PipelineError,
    SeriesSolution,
    SingularSolution,
    SmoothFamily,
    build_family,
    build_series,
    build_singular,
    eig3_sym,
    emit_plotdata,
    test_field_ids,
)

__all__ = [
    "Error",
    "Handle",
    "ParameterError",
    "PipelineError",
    "SeriesSolution",
    "SingularSolution",
    "SmoothFamily",
    "build_family",
    "build_series",
    "build_singular",
    "ck_solve_report",
    "coeff_a",
    "default_config",
    "eig3_sym",
    "emit_plotdata",
    "family_report",
    "holder_report",
    "normalize_config",
    "phase_report",
    "property_2_1_report",
    "report",
    "run_pipeline",
    "sobolev_report",
    "test_field_ids",
    "weak_residual_report",
]


def _fraction(text):
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den or 1))


def coeff_a(m):
    return [_fraction(c) for c in _core.coeff_a(m)]


def report(obj):
    """Decoded report of a built solution."""
    return json.loads(obj.report_json)


def property_2_1_report(m, eps="1/100", cap=None):
    return json.loads(_core.property_2_1_report(m, str(eps), cap or 4 * m))


def ck_solve_report(m, eps="1/160", cap=8):
    return json.loads(_core.ck_solve_report(m, str(eps), cap))


def holder_report(handle, m, seed=42):
    return json.loads(_core.holder_report(handle, m, seed))


def phase_report(handle, target, n=1000, seed=42):
    return json.loads(_core.phase_report(handle, target, n, seed))


def sobolev_report(singular, samples_per_shell=1_000_000, seed=42):
    return json.loads(_core.sobolev_report(singular, samples_per_shell, seed))


def family_report(family, neighbors=1000, seed=42):
    return json.loads(_core.family_report(family, neighbors, seed))


def weak_residual_report(singular, field, deltas=(0.1, 0.05, 0.02, 0.01)):
    return json.loads(_core.weak_residual_report(singular, field, list(deltas)))


def default_config():
    """Default run configuration as a dict of strings."""
    return _parse_lines(_core.default_config_text())


def normalize_config(values):
    """Round-trips a dict of config values through the C++ parser."""
    return _parse_lines(_core.normalize_config_text(_format_lines(values)))


def run_pipeline(out, **overrides):
    """Runs the full pipeline into ``out`` and returns the exit code."""
    values = dict(overrides)
    values["out"] = str(out)
    return _core.run_pipeline_text(_format_lines(values))


def _format_lines(values):
    lines = []
    for key, value in values.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _parse_lines(text):
    out = {}
    for line in text.splitlines():
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out
