"""
Configuration management for hmm-mcmc
"""

from .settings import (
    HmmMcmcConfig,
    ConfigManager,
    SamplerSettings,
    DiagnosticsSettings,
    AutoblockSettings,
    RunSettings,
    LoggingSettings,
    load_config,
    create_default_config_file
)

__all__ = [
    'HmmMcmcConfig',
    'ConfigManager',
    'SamplerSettings',
    'DiagnosticsSettings',
    'AutoblockSettings',
    'RunSettings',
    'LoggingSettings',
    'load_config',
    'create_default_config_file'
]
