"""
Run configuration files: YAML documents with the sections run, packet,
potential, grid and detector. Keys mirror the model fields; unknown
sections or keys are rejected by the models.
"""

from pathlib import Path
from typing import Optional, Union

import yaml
from loguru import logger

from src.wpdiff.domain.scenario_model import ScenarioConfig


def parse_config(text: str) -> ScenarioConfig:
    """
    Args:
        text: str: YAML document.

    Returns:
        ScenarioConfig: validated configuration.

    Raises:
        ValueError: if the document is not a mapping; pydantic
            ValidationError for unknown keys or invalid values.
        yaml.YAMLError: for malformed YAML.
    """
    document = yaml.safe_load(text)
    if not isinstance(document, dict):
        raise ValueError("config file must be a mapping of sections")
    return ScenarioConfig.model_validate(document)


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    with open(path, "r") as file:
        config = parse_config(file.read())
    logger.debug(f"loaded {config.run.mode} config from {path}")
    return config


def dump_config(config: ScenarioConfig, path: Optional[Union[str, Path]] = None) -> str:
    """
    Canonical YAML of the explicitly set fields, sorted keys. Loading the
    result gives back an equal config with the same defaulted fields.
    """
    document = config.model_dump(mode="json", exclude_unset=True)
    text = yaml.safe_dump(document, sort_keys=True, default_flow_style=False)
    if path is not None:
        Path(path).write_text(text, newline="\n")
    return text
