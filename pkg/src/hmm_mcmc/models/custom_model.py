"""
Declarative custom models restricted to the built-in structural patterns

Example file::

    {"name": "cjs-timed", "pattern": "cjs", "num_occasions": 7,
     "time_dependent_survival": true}
"""

import logging
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..core.base_model import HierarchicalModel
from ..core.exceptions import ModelSpecificationException
from ..utils.stream_utils import read_text_file
from .dipper_model import CjsModel
from .goose_model import GooseModel
from .orchid_model import OrchidModel

logger = logging.getLogger(__name__)

Pattern = Literal["cjs", "multistate-time-survival", "multistate-site-survival"]


class CustomModelConfig(BaseModel):
    """Parameter-to-matrix wiring of a custom model"""

    name: str = "custom"
    pattern: Pattern
    num_occasions: Optional[int] = Field(default=None, ge=2)
    time_dependent_survival: bool = False
    time_dependent_detection: bool = False
    num_observable_states: int = Field(default=2, ge=1)
    num_sites: int = Field(default=3, ge=1)

    @model_validator(mode="after")
    def _check_occasions(self) -> "CustomModelConfig":
        needs_occasions = self.pattern != "cjs" or (
            self.time_dependent_survival or self.time_dependent_detection
        )
        if needs_occasions and self.num_occasions is None:
            raise ValueError(f"pattern '{self.pattern}' needs num_occasions")
        return self


def build_custom_model(config: CustomModelConfig) -> HierarchicalModel:
    """Instantiate the model class behind a pattern"""
    if config.pattern == "cjs":
        model: HierarchicalModel = CjsModel(
            name=config.name,
            num_occasions=config.num_occasions,
            time_dependent_survival=config.time_dependent_survival,
            time_dependent_detection=config.time_dependent_detection,
        )
    elif config.pattern == "multistate-time-survival":
        model = OrchidModel(config.num_occasions, config.num_observable_states)
    else:
        model = GooseModel(config.num_occasions, config.num_sites)

    model.name = config.name
    logger.info(f"Built custom model '{config.name}' ({config.pattern}, {model.dimension} parameters)")
    return model


def load_custom_model(path: Union[str, Path]) -> HierarchicalModel:
    """Read a JSON model description and build it"""
    try:
        config = CustomModelConfig.model_validate_json(read_text_file(path))
    except ValidationError as e:
        raise ModelSpecificationException(f"Invalid model file {path}: {e}")
    return build_custom_model(config)
