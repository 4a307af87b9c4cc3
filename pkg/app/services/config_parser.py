from pathlib import Path
from typing import Any, Optional, Sequence, Union
import yaml
from pydantic import ValidationError

from app.exceptions import ConfigurationError
from app.models.config_models import ExperimentConfig
from logger_config import logger


# --- Helpers

def _node_line(root: Optional[yaml.Node], location: Sequence[Union[str, int]]) -> Optional[int]:
    """1-based line of the deepest YAML node reachable along a pydantic error location."""
    node, line = root, (root.start_mark.line + 1) if root is not None else None
    for key in location:
        if isinstance(node, yaml.MappingNode):
            match = next((pair for pair in node.value if pair[0].value == str(key)), None)
            if match is None:
                break
            node = match[1]
            line = match[0].start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark.line + 1
        else:
            break
    return line


def _describe(error: dict) -> str:
    location = ".".join(str(part) for part in error["loc"]) or "<root>"
    message = error["msg"].removeprefix("Value error, ")
    return f"{location}: {message}"


# --- Parsing

def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate a YAML experiment description.

    Args:
        text: YAML document

    Returns:
        ExperimentConfig

    Raises:
        ConfigurationError: malformed YAML or invalid values, with the offending line when known
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigurationError(f"malformed YAML: {getattr(e, 'problem', None) or str(e)}",
                                 line=mark.line + 1 if mark is not None else None) from e

    if not isinstance(data, dict):
        raise ConfigurationError("config must be a mapping of sections", line=1)

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        line = _node_line(root, first["loc"])
        logger.debug(f"config validation failed with {e.error_count()} error(s)")
        raise ConfigurationError(_describe(first), line=line) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and parse a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    logger.info(f"Loading config {path}")
    try:
        return parse_config(path.read_text(encoding="utf-8"))
    except ConfigurationError as e:
        logger.error(f"Error loading config {path}: {str(e)}")
        raise


def config_summary(config: ExperimentConfig) -> dict[str, Any]:
    """JSON-ready dump of the resolved config for summary files."""
    return config.model_dump(mode="json")
