"""
Capture-history datasets and their reduced representation

File format: one history per line. Codes are single digits written
back-to-back ("1011") or whitespace-separated tokens ("1 0 1 1"); code 0
means "not seen". Blank lines and lines starting with '#' are skipped.
A reduced file appends ``:<multiplicity>`` to every line ("1011:12").
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core.exceptions import DatasetParseException, DimensionMismatchException
from .core.hmm import NOT_SEEN, ObservationHistory, emission_rows
from .utils.stream_utils import read_text_file

logger = logging.getLogger(__name__)

MULTIPLICITY_SEPARATOR = ":"


@dataclass(frozen=True)
class CaptureDataset:
    """n observation histories sharing k occasions"""

    histories: Tuple[ObservationHistory, ...]
    num_occasions: int
    obs_alphabet_size: int
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        histories = tuple(self.histories)
        object.__setattr__(self, "histories", histories)
        if self.obs_alphabet_size < 2:
            raise DimensionMismatchException("the observation alphabet needs at least two codes")
        for index, history in enumerate(histories):
            if history.num_occasions != self.num_occasions:
                raise DimensionMismatchException(
                    f"history {index} has {history.num_occasions} occasions, "
                    f"expected {self.num_occasions}"
                )
            if max(history.codes) >= self.obs_alphabet_size:
                raise DimensionMismatchException(
                    f"history {index} uses codes outside 0..{self.obs_alphabet_size - 1}"
                )

    def __len__(self) -> int:
        return len(self.histories)

    def __iter__(self):
        return iter(self.histories)

    @property
    def num_histories(self) -> int:
        return len(self.histories)


@dataclass(frozen=True)
class ReducedDataset:
    """Unique histories with their multiplicities"""

    unique_histories: Tuple[ObservationHistory, ...]
    multiplicities: Tuple[int, ...]
    original_count: int
    num_occasions: int
    obs_alphabet_size: int

    def __post_init__(self):
        uniques = tuple(self.unique_histories)
        counts = tuple(int(m) for m in self.multiplicities)
        object.__setattr__(self, "unique_histories", uniques)
        object.__setattr__(self, "multiplicities", counts)
        if len(uniques) != len(counts):
            raise DimensionMismatchException("one multiplicity is needed per unique history")
        if any(m < 1 for m in counts):
            raise DimensionMismatchException("multiplicities must be positive")
        if len(set(uniques)) != len(uniques):
            raise DimensionMismatchException("unique histories must be pairwise distinct")
        if sum(counts) != self.original_count:
            raise DimensionMismatchException(
                f"multiplicities sum to {sum(counts)}, expected {self.original_count}"
            )

    def __len__(self) -> int:
        return len(self.unique_histories)

    @property
    def compression_factor(self) -> float:
        return self.original_count / len(self.unique_histories) if self.unique_histories else 1.0


def _tokenize(line: str) -> List[str]:
    """Split a history into code tokens"""
    parts = line.split()
    if len(parts) > 1:
        return parts
    return list(parts[0]) if parts else []


def _parse_lines(text: str, obs_alphabet_size: int,
                 allow_multiplicity: bool) -> Tuple[List[ObservationHistory], List[int]]:
    """Parse histories and optional multiplicities, reporting 1-based line numbers"""
    histories: List[ObservationHistory] = []
    counts: List[int] = []
    width: Optional[int] = None

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        multiplicity = 1
        if MULTIPLICITY_SEPARATOR in line:
            if not allow_multiplicity:
                raise DatasetParseException(
                    "multiplicity found in a raw dataset; load it as reduced", line_number
                )
            line, _, count_text = line.rpartition(MULTIPLICITY_SEPARATOR)
            try:
                multiplicity = int(count_text.strip())
            except ValueError:
                raise DatasetParseException(f"invalid multiplicity '{count_text.strip()}'", line_number)
            if multiplicity < 1:
                raise DatasetParseException("multiplicity must be positive", line_number)

        tokens = _tokenize(line)
        try:
            codes = [int(token) for token in tokens]
        except ValueError:
            raise DatasetParseException(f"non-integer code in '{line}'", line_number)
        if not codes:
            raise DatasetParseException("empty history", line_number)

        bad = [c for c in codes if not 0 <= c < obs_alphabet_size]
        if bad:
            raise DatasetParseException(
                f"code {bad[0]} outside the alphabet 0..{obs_alphabet_size - 1}", line_number
            )
        if width is None:
            width = len(codes)
        elif len(codes) != width:
            raise DatasetParseException(
                f"ragged history: {len(codes)} occasions, expected {width}", line_number
            )

        histories.append(ObservationHistory(tuple(codes), label=f"line {line_number}"))
        counts.append(multiplicity)

    if not histories:
        raise DatasetParseException("dataset contains no histories")
    return histories, counts


def parse_dataset(text: str, obs_alphabet_size: int) -> CaptureDataset:
    """Parse a raw capture-history file"""
    histories, _ = _parse_lines(text, obs_alphabet_size, allow_multiplicity=False)
    dataset = CaptureDataset(tuple(histories), histories[0].num_occasions, obs_alphabet_size)
    logger.info(f"Parsed {len(dataset)} histories over {dataset.num_occasions} occasions")
    return dataset


def parse_reduced_dataset(text: str, obs_alphabet_size: int) -> ReducedDataset:
    """Parse a reduced file; lines without ':' count once, repeats are merged"""
    histories, counts = _parse_lines(text, obs_alphabet_size, allow_multiplicity=True)
    merged: Dict[ObservationHistory, int] = {}
    for history, count in zip(histories, counts):
        merged[history] = merged.get(history, 0) + count
    return ReducedDataset(
        unique_histories=tuple(merged),
        multiplicities=tuple(merged.values()),
        original_count=sum(counts),
        num_occasions=histories[0].num_occasions,
        obs_alphabet_size=obs_alphabet_size,
    )


def is_reduced_text(text: str) -> bool:
    """True if any history line carries a multiplicity"""
    return any(
        MULTIPLICITY_SEPARATOR in line
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    )


def load_data(path: Union[str, Path], obs_alphabet_size: int) -> Union[CaptureDataset, ReducedDataset]:
    """Read a raw or reduced capture-history file"""
    text = read_text_file(path)
    if is_reduced_text(text):
        return parse_reduced_dataset(text, obs_alphabet_size)
    return parse_dataset(text, obs_alphabet_size)


def reduce_dataset(dataset: CaptureDataset) -> ReducedDataset:
    """Collapse identical histories, keeping first-appearance order"""
    counts = Counter(dataset.histories)
    uniques = tuple(dict.fromkeys(dataset.histories))
    reduced = ReducedDataset(
        unique_histories=uniques,
        multiplicities=tuple(counts[h] for h in uniques),
        original_count=len(dataset),
        num_occasions=dataset.num_occasions,
        obs_alphabet_size=dataset.obs_alphabet_size,
    )
    logger.info(
        f"Reduced {reduced.original_count} histories to {len(reduced)} unique "
        f"(factor {reduced.compression_factor:.1f})"
    )
    return reduced


def expand_dataset(reduced: ReducedDataset) -> CaptureDataset:
    """Repeat each unique history by its multiplicity"""
    histories = tuple(
        history
        for history, count in zip(reduced.unique_histories, reduced.multiplicities)
        for _ in range(count)
    )
    return CaptureDataset(histories, reduced.num_occasions, reduced.obs_alphabet_size)


def format_history(history: ObservationHistory, separator: str = "") -> str:
    return separator.join(str(c) for c in history.codes)


def write_dataset(dataset: Union[CaptureDataset, ReducedDataset], path: Union[str, Path]) -> Path:
    """Write a raw or reduced dataset in the text format"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    separator = "" if dataset.obs_alphabet_size <= 10 else " "

    if isinstance(dataset, ReducedDataset):
        lines = [
            f"{format_history(h, separator)}{MULTIPLICITY_SEPARATOR}{m}"
            for h, m in zip(dataset.unique_histories, dataset.multiplicities)
        ]
    else:
        lines = [format_history(h, separator) for h in dataset.histories]

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(lines)} histories to {path}")
    return path


@dataclass(frozen=True)
class HistoryMatrix:
    """
    Array view of a dataset used by the vectorised likelihoods.

    ``weights`` are the multiplicities (all ones for a raw dataset).
    """

    codes: np.ndarray
    first: np.ndarray
    weights: np.ndarray
    obs_alphabet_size: int

    @classmethod
    def from_histories(cls, histories: Sequence[ObservationHistory],
                       weights: Iterable[float], obs_alphabet_size: int) -> "HistoryMatrix":
        codes = np.array([h.codes for h in histories], dtype=np.int64)
        first = np.array([h.first_occasion for h in histories], dtype=np.int64)
        return cls(codes, first, np.asarray(list(weights), dtype=float), obs_alphabet_size)

    @classmethod
    def from_data(cls, data: Union[CaptureDataset, ReducedDataset]) -> "HistoryMatrix":
        if isinstance(data, ReducedDataset):
            return cls.from_histories(data.unique_histories, data.multiplicities,
                                      data.obs_alphabet_size)
        return cls.from_histories(data.histories, np.ones(len(data)), data.obs_alphabet_size)

    @property
    def num_histories(self) -> int:
        return int(self.codes.shape[0])

    @property
    def num_occasions(self) -> int:
        return int(self.codes.shape[1])

    @property
    def rows(self) -> np.ndarray:
        return emission_rows(self.codes, self.obs_alphabet_size)

    @property
    def first_codes(self) -> np.ndarray:
        return self.codes[np.arange(self.num_histories), self.first]

    @property
    def seen(self) -> np.ndarray:
        return self.codes != NOT_SEEN

    @property
    def last(self) -> np.ndarray:
        """Final sighting occasion (first occasion when never seen)"""
        seen = self.seen
        reversed_index = np.argmax(seen[:, ::-1], axis=1)
        last = self.num_occasions - 1 - reversed_index
        return np.where(seen.any(axis=1), last, self.first)

    def groups(self) -> Dict[Tuple[int, int], np.ndarray]:
        """History indices grouped by (first occasion, first code)"""
        keys = np.stack([self.first, self.first_codes], axis=1)
        grouped: Dict[Tuple[int, int], List[int]] = {}
        for index, (first, code) in enumerate(keys.tolist()):
            grouped.setdefault((first, code), []).append(index)
        return {key: np.asarray(idx, dtype=np.int64) for key, idx in sorted(grouped.items())}
