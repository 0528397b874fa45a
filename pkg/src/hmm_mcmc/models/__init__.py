"""
Built-in hierarchical models and the model registry
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

from ..core.base_model import HierarchicalModel
from ..core.exceptions import ModelSpecificationException
from .custom_model import CustomModelConfig, build_custom_model, load_custom_model
from .dipper_model import CjsModel, build_dipper_model
from .goose_model import GooseModel, build_goose_model
from .orchid_model import OrchidModel, build_orchid_model
from .simulation import simulate_dataset

logger = logging.getLogger(__name__)


@dataclass
class ModelRegistration:
    """Registration information for a model builder"""
    name: str
    builder: Callable[[], HierarchicalModel]
    priority: float
    description: str = ""


_registry: List[ModelRegistration] = []


def register_model(name: str, builder: Callable[[], HierarchicalModel], *,
                   priority: float = 0.0, description: str = ""):
    """Register a model builder; lower priority is listed first"""
    registration = ModelRegistration(name, builder, priority, description)

    # Insert in priority order, replacing an earlier registration of the name
    _registry[:] = [r for r in _registry if r.name != name]
    insert_pos = len(_registry)
    for i, reg in enumerate(_registry):
        if reg.priority > priority:
            insert_pos = i
            break
    _registry.insert(insert_pos, registration)
    logger.debug(f"Registered model: {name} (priority: {priority})")


def available_models() -> Dict[str, str]:
    """Registered model names with their descriptions"""
    return {r.name: r.description for r in _registry}


def get_model(name: str, config_path: Optional[Union[str, Path]] = None) -> HierarchicalModel:
    """
    Build a model by name.

    ``custom`` reads its JSON description from ``config_path``.
    """
    if name == "custom":
        if config_path is None:
            raise ModelSpecificationException("the custom model needs a model file")
        return load_custom_model(config_path)

    for registration in _registry:
        if registration.name == name:
            return registration.builder()

    known = ", ".join([r.name for r in _registry] + ["custom"])
    raise ModelSpecificationException(f"Unknown model '{name}' (known: {known})")


register_model("dipper", build_dipper_model, priority=0.0,
               description="single-state CJS, constant survival and detection (2 parameters)")
register_model("orchid", build_orchid_model, priority=1.0,
               description="multistate, time-dependent survival, dormant state (19 parameters)")
register_model("goose", build_goose_model, priority=2.0,
               description="multistate, three sites, site-dependent survival (21 parameters)")


__all__ = [
    "CjsModel",
    "OrchidModel",
    "GooseModel",
    "CustomModelConfig",
    "build_dipper_model",
    "build_orchid_model",
    "build_goose_model",
    "build_custom_model",
    "load_custom_model",
    "simulate_dataset",
    "register_model",
    "available_models",
    "get_model",
]
