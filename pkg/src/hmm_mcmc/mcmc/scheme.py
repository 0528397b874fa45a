"""
Sampler schemes: how parameters are grouped into Metropolis blocks
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from ..core.exceptions import SamplerSchemeException
from ..utils.stream_utils import read_text_file

logger = logging.getLogger(__name__)


class AdaptationSettings(BaseModel):
    """Proposal adaptation for every sampler of a scheme"""

    enabled: bool = True
    interval: int = Field(default=200, ge=1)
    scalar_target: float = Field(default=0.44, gt=0.0, lt=1.0)
    block_target: float = Field(default=0.234, gt=0.0, lt=1.0)


class SamplerScheme(BaseModel):
    """
    A partition of parameter indices into blocks plus latent-state sampling.

    Singleton blocks get a univariate random-walk sampler, larger blocks a
    multivariate one.
    """

    blocks: List[List[int]]
    latent_sampling: bool = False
    adaptation: AdaptationSettings = Field(default_factory=AdaptationSettings)
    initial_scale: Optional[float] = Field(default=None, ge=0.0)
    param_names: Optional[List[str]] = None

    @field_validator("blocks")
    @classmethod
    def _check_blocks(cls, blocks: List[List[int]]) -> List[List[int]]:
        seen = set()
        for block in blocks:
            if not block:
                raise ValueError("blocks must not be empty")
            for index in block:
                if index < 0:
                    raise ValueError(f"negative parameter index {index}")
                if index in seen:
                    raise ValueError(f"parameter index {index} appears in more than one block")
                seen.add(index)
        return blocks

    @model_validator(mode="after")
    def _check_names(self) -> "SamplerScheme":
        if self.param_names is not None:
            self.validate_for(len(self.param_names))
        return self

    @classmethod
    def univariate(cls, dimension: int, **kwargs) -> "SamplerScheme":
        return cls(blocks=[[i] for i in range(dimension)], **kwargs)

    @classmethod
    def single_block(cls, dimension: int, **kwargs) -> "SamplerScheme":
        return cls(blocks=[list(range(dimension))], **kwargs)

    @property
    def dimension(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def multi_blocks(self) -> List[List[int]]:
        return [b for b in self.blocks if len(b) > 1]

    @property
    def num_multi_blocks(self) -> int:
        return len(self.multi_blocks)

    def validate_for(self, dimension: int, param_names: Optional[Sequence[str]] = None):
        """Check the blocks partition exactly 0..dimension-1"""
        covered = sorted(i for b in self.blocks for i in b)
        if covered != list(range(dimension)):
            missing = sorted(set(range(dimension)) - set(covered))
            extra = sorted(set(covered) - set(range(dimension)))
            raise SamplerSchemeException(
                f"blocks do not partition {dimension} parameters "
                f"(missing {missing}, out of range {extra})"
            )
        if param_names is not None and self.param_names is not None:
            if list(param_names) != list(self.param_names):
                raise SamplerSchemeException(
                    "scheme was built for parameters "
                    f"{self.param_names}, model has {list(param_names)}"
                )

    def describe(self, names: Optional[Sequence[str]] = None) -> str:
        """Blocks as text, e.g. "{phi, p} {psi_w_1_1}" """
        names = names or self.param_names
        parts = []
        for block in self.blocks:
            labels = [names[i] if names else str(i) for i in block]
            parts.append("{" + ", ".join(labels) + "}")
        return " ".join(parts)

    def canonical(self) -> "SamplerScheme":
        """Same scheme with sorted blocks, for comparing partitions"""
        blocks = sorted(sorted(b) for b in self.blocks)
        return self.model_copy(update={"blocks": blocks})

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Saved sampler scheme to {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SamplerScheme":
        try:
            return cls.model_validate_json(read_text_file(path))
        except (ValidationError, json.JSONDecodeError) as e:
            raise SamplerSchemeException(f"Invalid sampler scheme {path}: {e}")
