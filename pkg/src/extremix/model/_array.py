from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic_core import core_schema

if TYPE_CHECKING:
    from pydantic import GetCoreSchemaHandler


def _frozen(val: np.ndarray) -> np.ndarray:
    # models are frozen; so is their data
    val = np.array(val, copy=True)
    val.setflags(write=False)
    return val


def _validate_matrix(val: Any) -> np.ndarray:
    if not isinstance(val, np.ndarray):
        val = np.asarray(val, dtype=float)
    if val.ndim == 1:
        val = val.reshape(-1, 1)
    if val.ndim != 2:
        raise ValueError(f"Series data must be 2D (n, d), not {val.shape}")
    if not np.issubdtype(val.dtype, np.floating):
        val = val.astype(float)
    return _frozen(val)


def _validate_counts(val: Any) -> np.ndarray:
    arr = np.asarray(val)
    if arr.ndim != 1:
        raise ValueError(f"Block counts must be 1D, not {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.array_equal(arr, np.round(arr)):
            raise ValueError("Block counts must be integers")
    arr = arr.astype(np.int64)
    if (arr < 0).any():
        raise ValueError("Block counts must be nonnegative")
    return _frozen(arr)


class Matrix2D(np.ndarray):
    """Pydantic-compatible read-only (n, d) float array."""

    @classmethod
    def __get_pydantic_core_schema__(
        cls, source_type: Any, handler: GetCoreSchemaHandler
    ) -> core_schema.CoreSchema:
        def _serialize(val: np.ndarray) -> list:
            return val.tolist()  # type: ignore

        list_of_float = core_schema.list_schema(core_schema.float_schema())
        ser_schema = core_schema.plain_serializer_function_ser_schema(
            _serialize,
            return_schema=core_schema.list_schema(list_of_float),
        )

        return core_schema.no_info_before_validator_function(
            _validate_matrix,
            core_schema.any_schema(),
            serialization=ser_schema,
        )


class CountVector(np.ndarray):
    """Pydantic-compatible read-only vector of nonnegative integer counts."""

    @classmethod
    def __get_pydantic_core_schema__(
        cls, source_type: Any, handler: GetCoreSchemaHandler
    ) -> core_schema.CoreSchema:
        ser_schema = core_schema.plain_serializer_function_ser_schema(
            lambda val: val.tolist(),
            return_schema=core_schema.list_schema(core_schema.int_schema()),
        )
        return core_schema.no_info_before_validator_function(
            _validate_counts,
            core_schema.any_schema(),
            serialization=ser_schema,
        )
