from .experiment import (
    Experiment,
    emit_report,
    parse_experiment,
    report_rows,
    run_experiment,
)

__all__ = ["Experiment", "emit_report", "parse_experiment", "report_rows", "run_experiment"]
