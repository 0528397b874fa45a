"""
Configuration management for hmm-mcmc
"""

import os
import json
import logging
from typing import Dict, Any, Optional, Union, List
from pathlib import Path
from dataclasses import dataclass, asdict, field

from ..core.exceptions import ConfigurationException

logger = logging.getLogger(__name__)


@dataclass
class SamplerSettings:
    """Settings for the MCMC samplers"""
    adaptation_interval: int = 200
    scalar_target: float = 0.44
    block_target: float = 0.234
    covariance_jitter: float = 1e-10
    max_workers: int = 1


@dataclass
class DiagnosticsSettings:
    """Settings for chain diagnostics"""
    discard_fraction: float = 0.1


@dataclass
class AutoblockSettings:
    """Settings for automated block selection"""
    pilot_iterations: int = 10_000
    eval_iterations: int = 5_000
    min_pilot_rows: int = 1_000
    cut_heights: List[float] = field(
        default_factory=lambda: [round(0.1 * i, 1) for i in range(11)]
    )
    iterate: bool = False
    max_rounds: int = 5


@dataclass
class RunSettings:
    """Settings for CLI runs"""
    default_iterations: int = 10_000
    output_root: str = "runs"
    show_progress: bool = False


@dataclass
class LoggingSettings:
    """Settings for logging"""
    log_level: str = "INFO"
    log_file: Optional[str] = None


@dataclass
class HmmMcmcConfig:
    """Main configuration class"""
    sampler: SamplerSettings = field(default_factory=SamplerSettings)
    diagnostics: DiagnosticsSettings = field(default_factory=DiagnosticsSettings)
    autoblock: AutoblockSettings = field(default_factory=AutoblockSettings)
    run: RunSettings = field(default_factory=RunSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)


_SECTIONS = {
    "sampler": SamplerSettings,
    "diagnostics": DiagnosticsSettings,
    "autoblock": AutoblockSettings,
    "run": RunSettings,
    "logging": LoggingSettings,
}


class ConfigManager:
    """Configuration manager"""
    
    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        self.config_path = self._resolve_config_path(config_path)
        self.config = self._load_config()
    
    def _resolve_config_path(self, config_path: Optional[Union[str, Path]]) -> Path:
        """Resolve configuration file path"""
        if config_path:
            return Path(config_path)
        
        env_path = os.getenv("HMM_MCMC_CONFIG")
        if env_path:
            return Path(env_path)
        
        current_config = Path("hmm_mcmc_config.json")
        if current_config.exists():
            return current_config
        
        home_config = Path.home() / ".hmm_mcmc" / "config.json"
        if home_config.exists():
            return home_config
        
        return current_config
    
    def _load_config(self) -> HmmMcmcConfig:
        """Load configuration from file, then apply environment overrides"""
        config = HmmMcmcConfig()
        
        if self.config_path.exists():
            try:
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                config = self._dict_to_config(data)
                logger.info(f"Loaded configuration from {self.config_path}")
            except (json.JSONDecodeError, TypeError) as e:
                raise ConfigurationException(
                    f"Invalid configuration file {self.config_path}: {e}"
                )
        
        self._load_from_environment(config)
        self._validate(config)
        
        return config
    
    def _dict_to_config(self, data: Dict[str, Any]) -> HmmMcmcConfig:
        """Convert dictionary to configuration object"""
        config = HmmMcmcConfig()
        
        for section_name, section_cls in _SECTIONS.items():
            if section_name in data:
                setattr(config, section_name, section_cls(**data[section_name]))
        
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            logger.warning(f"Ignoring unknown configuration sections: {sorted(unknown)}")
        
        return config
    
    def _load_from_environment(self, config: HmmMcmcConfig):
        """Load settings from environment variables"""
        env_mappings = {
            "HMM_MCMC_OUTPUT_ROOT": ("run", "output_root"),
            "HMM_MCMC_ITERATIONS": ("run", "default_iterations"),
            "HMM_MCMC_DISCARD_FRACTION": ("diagnostics", "discard_fraction"),
            "HMM_MCMC_MAX_WORKERS": ("sampler", "max_workers"),
            "LOG_LEVEL": ("logging", "log_level"),
            "LOG_FILE": ("logging", "log_file"),
        }
        
        for env_var, (section, field_name) in env_mappings.items():
            value = os.getenv(env_var)
            if value is None:
                continue
            
            section_obj = getattr(config, section)
            field_type = type(getattr(section_obj, field_name))
            
            if field_type == bool:
                value = value.lower() in ("true", "1", "yes", "on")
            elif field_type == int:
                try:
                    value = int(value)
                except ValueError:
                    logger.warning(f"Invalid integer value for {env_var}: {value}")
                    continue
            elif field_type == float:
                try:
                    value = float(value)
                except ValueError:
                    logger.warning(f"Invalid float value for {env_var}: {value}")
                    continue
            
            setattr(section_obj, field_name, value)
            logger.debug(f"Set {section}.{field_name} = {value} from environment")
    
    def _validate(self, config: HmmMcmcConfig):
        """Reject settings no run could use"""
        if not 0.0 <= config.diagnostics.discard_fraction < 1.0:
            raise ConfigurationException(
                f"discard_fraction must lie in [0, 1), got {config.diagnostics.discard_fraction}"
            )
        if config.sampler.adaptation_interval < 1:
            raise ConfigurationException("adaptation_interval must be positive")
        for name in ("scalar_target", "block_target"):
            target = getattr(config.sampler, name)
            if not 0.0 < target < 1.0:
                raise ConfigurationException(f"{name} must lie in (0, 1), got {target}")
        if config.run.default_iterations < 1:
            raise ConfigurationException("default_iterations must be positive")
    
    def save_config(self, path: Optional[Union[str, Path]] = None):
        """Save configuration to file"""
        save_path = Path(path) if path else self.config_path
        save_path.parent.mkdir(parents=True, exist_ok=True)
        
        with open(save_path, 'w', encoding='utf-8') as f:
            json.dump(asdict(self.config), f, indent=2, ensure_ascii=False)
        
        logger.info(f"Saved configuration to {save_path}")
    
    def get_config(self) -> HmmMcmcConfig:
        """Get current configuration"""
        return self.config
    
    def update_config(self, updates: Dict[str, Any]):
        """Update configuration with new values"""
        for section_name, section_data in updates.items():
            if hasattr(self.config, section_name):
                section_obj = getattr(self.config, section_name)
                for field_name, value in section_data.items():
                    if hasattr(section_obj, field_name):
                        setattr(section_obj, field_name, value)
                        logger.debug(f"Updated {section_name}.{field_name} = {value}")
        self._validate(self.config)


def load_config(config_path: Optional[Union[str, Path]] = None) -> HmmMcmcConfig:
    """Load configuration (convenience function)"""
    manager = ConfigManager(config_path)
    return manager.get_config()


def create_default_config_file(path: Union[str, Path]) -> Path:
    """Write a configuration file holding every default value"""
    save_path = Path(path)
    save_path.parent.mkdir(parents=True, exist_ok=True)
    
    with open(save_path, 'w', encoding='utf-8') as f:
        json.dump(asdict(HmmMcmcConfig()), f, indent=2, ensure_ascii=False)
    
    logger.info(f"Created default configuration at {save_path}")
    return save_path
