"""
Валидаторы аргументов командной строки.
"""
from .input_validators import (
    argparse_type,
    parse_float,
    parse_integer,
    validate_existing_file,
    validate_integer,
    validate_output_dir,
    validate_positive_float,
    validate_positive_integer,
    validate_seed,
    validate_task_counts,
    validate_threshold,
)

__all__ = [
    "argparse_type",
    "parse_float",
    "parse_integer",
    "validate_existing_file",
    "validate_integer",
    "validate_output_dir",
    "validate_positive_float",
    "validate_positive_integer",
    "validate_seed",
    "validate_task_counts",
    "validate_threshold",
]
