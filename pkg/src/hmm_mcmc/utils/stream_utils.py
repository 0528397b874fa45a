"""
Text decoding for capture-history and model files

Dataset files come from spreadsheets and field software in assorted
encodings; codes are ASCII digits either way.
"""

import logging
from pathlib import Path
from typing import BinaryIO, List, Optional, Union

from charset_normalizer import from_bytes

logger = logging.getLogger(__name__)


def read_stream_with_encoding(stream: BinaryIO, 
                              encoding: Optional[str] = None,
                              fallback_encodings: Optional[List[str]] = None) -> str:
    """
    Decode a binary stream, detecting its encoding.
    
    Args:
        stream: Open binary stream positioned at the start of the file
        encoding: Encoding to try before detection
        fallback_encodings: Encodings tried when detection finds nothing
        
    Returns:
        Decoded text content
    """
    if fallback_encodings is None:
        fallback_encodings = ['utf-8', 'latin-1']
    
    content = stream.read()
    
    if encoding:
        try:
            return content.decode(encoding)
        except UnicodeDecodeError:
            logger.warning(f"Specified encoding {encoding} failed")
    
    # utf-8 first: short digit-only files are ambiguous to the detector
    try:
        return content.decode('utf-8-sig')
    except UnicodeDecodeError:
        pass
    
    best = from_bytes(content).best()
    if best is not None:
        logger.debug(f"Detected encoding {best.encoding}")
        return str(best)
    
    for enc in fallback_encodings:
        try:
            return content.decode(enc)
        except UnicodeDecodeError:
            continue
    
    return content.decode('utf-8', errors='ignore')


def read_text_file(path: Union[str, Path], encoding: Optional[str] = None) -> str:
    """Read a text file, detecting its encoding"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, 'rb') as f:
        return read_stream_with_encoding(f, encoding)
