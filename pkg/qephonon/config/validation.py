"""
Pre-flight checks behind `qephonon config check`
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import ValidationError

from .settings import Settings

logger = logging.getLogger(__name__)


def _writable_dir_problem(path: Path, label: str) -> Optional[str]:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        return f"{label} cannot be created: {e}"
    if not os.access(path, os.W_OK):
        return f"{label} is not writable: {path}"
    return None


def validate_environment(
    settings: Optional[Settings] = None,
    user_values: Optional[Dict[str, Any]] = None,
) -> Tuple[bool, List[str]]:
    """
    Check output and log locations, and that the user defaults validate

    Returns:
        Tuple[bool, List[str]]: (is_valid, problems)
    """
    errors: List[str] = []

    if settings is None:
        try:
            settings = Settings()
        except ValidationError as e:
            return False, [f"Invalid settings: {err['loc'][0] if err['loc'] else ''} {err['msg']}" for err in e.errors()]

    for path, label in ((Path(settings.output_base_dir), "Output directory"), (Path(settings.log_file).parent, "Log directory")):
        problem = _writable_dir_problem(path, label)
        if problem:
            errors.append(problem)

    if user_values:
        try:
            Settings(**{**settings.model_dump(), **user_values})
        except ValidationError as e:
            errors.extend(f"User config {'.'.join(map(str, err['loc'])) or '<root>'}: {err['msg']}" for err in e.errors())

    for error in errors:
        logger.debug(f"Config check: {error}")
    return not errors, errors
