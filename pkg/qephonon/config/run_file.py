"""
Loading of YAML run configurations with flag overrides
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml
from pydantic import ValidationError

from ..exceptions import RunConfigError
from ..models.run_config import RunConfig


def _key_path(loc) -> str:
    return ".".join(str(part) for part in loc)


def apply_overrides(data: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Set dotted keys (``engine.dt_ps``) on a nested mapping; None values are skipped"""
    merged = dict(data)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = merged
        *parents, leaf = dotted.split(".")
        for part in parents:
            child = node.get(part)
            child = dict(child) if isinstance(child, Mapping) else {}
            node[part] = child
            node = child
        node[leaf] = value
    return merged


def build_run_config(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Validate a run configuration mapping

    Raises:
        RunConfigError: schema violation, with the dotted path of the first offending key
    """
    merged = apply_overrides(dict(data), overrides or {})
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        first = e.errors()[0]
        key_path = _key_path(first["loc"]) or "<root>"
        raise RunConfigError(f"{key_path}: {first['msg']}", key_path=key_path, cause=e) from e


def load_run_config(path: Path, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Read a YAML run file, apply flag overrides and validate"""
    path = Path(path)
    if not path.exists():
        raise RunConfigError(f"run configuration not found: {path}", key_path="<file>")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise RunConfigError(f"{path} is not valid YAML: {e}", key_path="<file>", cause=e) from e
    if not isinstance(data, dict):
        raise RunConfigError(f"{path} must hold a mapping at the top level", key_path="<root>")
    config = build_run_config(data, overrides)
    if config.fit.input is not None and not config.fit.input.is_absolute():
        config.fit.input = (path.parent / config.fit.input).resolve()
    return config
