"""
Utility modules for hmm-mcmc
"""

from .stream_utils import read_stream_with_encoding, read_text_file
from .format_utils import create_text_table, format_seconds, format_value, sanitize_filename

__all__ = [
    "read_stream_with_encoding",
    "read_text_file",
    "create_text_table",
    "format_seconds",
    "format_value",
    "sanitize_filename",
]
