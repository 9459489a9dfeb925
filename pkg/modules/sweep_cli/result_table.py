"""
Result Table Emitters

Column schema with units, CSV/JSON serialisation and the metadata sidecar.
CSV output is byte-stable for a fixed configuration: LF line endings, 17
significant digits, one header line with units in parentheses. Wall time only
ever lands in the metadata.

Version: 1.0
"""

import io
import sys
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from validation import QptConfig

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serialisable")


def _finite(data: Any) -> Any:
    # JSON has no inf/nan literals; non-finite floats are spelled out
    if isinstance(data, dict):
        return {k: _finite(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_finite(v) for v in data]
    if isinstance(data, (float, np.floating)) and not np.isfinite(data):
        return str(float(data))
    return data


def dump_json(data: Any) -> str:
    return json.dumps(_finite(data), indent=2, ensure_ascii=False, default=_to_builtin,
                      allow_nan=False) + '\n'


def sidecar_path(output_path: str) -> str:
    return f"{output_path}.meta.json"


###############################################################################
# RESULT TABLE
###############################################################################

@dataclass
class ResultTable:
    """Rows under a fixed (name, unit) schema plus run metadata"""

    columns: List[Tuple[str, str]]
    frame: pd.DataFrame
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if list(self.frame.columns) != names:
            raise ValueError(f"Table columns {list(self.frame.columns)} do not match schema {names}")

    @property
    def headers(self) -> List[str]:
        return [f"{name} ({unit})" for name, unit in self.columns]

    @property
    def flagged_rows(self) -> int:
        """Rows carrying a failure kind or an unconverged flag"""
        mask = pd.Series(False, index=self.frame.index)
        if 'flag' in self.frame:
            mask |= self.frame['flag'].fillna('').astype(str).ne('')
        if 'converged' in self.frame:
            mask |= ~self.frame['converged'].astype(bool)
        return int(mask.sum())

    def schema(self) -> List[Dict[str, str]]:
        return [{'name': name, 'unit': unit} for name, unit in self.columns]

    def records(self) -> List[Dict[str, Any]]:
        """Rows as dicts with NaN mapped to None"""
        cleaned = self.frame.astype(object).where(self.frame.notna(), None)
        return cleaned.to_dict(orient='records')

    ###########################################################################
    # SERIALISATION
    ###########################################################################

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        self.frame.to_csv(buffer, index=False, header=self.headers,
                          float_format=FLOAT_FORMAT, lineterminator='\n')
        return buffer.getvalue()

    def to_json_text(self) -> str:
        return dump_json({
            'schema': QptConfig.SCHEMA_VERSION,
            'columns': self.schema(),
            'rows': self.records(),
            'metadata': self.metadata,
        })

    def metadata_text(self) -> str:
        return dump_json({'columns': self.schema(), **self.metadata})

    def write(self, output_path: Optional[str], output_format: str) -> Optional[str]:
        """Write to output_path (CSV gets a metadata sidecar) or to stdout when no path is given"""
        text = self.to_csv_text() if output_format == 'csv' else self.to_json_text()
        if output_path is None:
            sys.stdout.write(text)
            return None

        try:
            with open(output_path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
            if output_format == 'csv':
                with open(sidecar_path(output_path), 'w', encoding='utf-8', newline='') as f:
                    f.write(self.metadata_text())
        except OSError as e:
            raise RuntimeError(f"Failed to write results to {output_path}: {e}") from e

        logger.info(f"Wrote {len(self.frame)} rows to {output_path} ({output_format})")
        return output_path
