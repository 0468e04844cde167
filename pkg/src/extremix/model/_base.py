from collections.abc import Iterable
from contextlib import suppress
from typing import Any, ClassVar

from pydantic import BaseModel, ConfigDict


class ExtendedConfig(ConfigDict, total=False):
    repr_exclude_defaults: bool


class FrozenModel(BaseModel):
    """Base class for all immutable extremix models."""

    model_config: ClassVar[ConfigDict] = ExtendedConfig(
        frozen=True,
        validate_default=True,
        arbitrary_types_allowed=True,
        repr_exclude_defaults=True,
    )

    def __repr_args__(self) -> Iterable[tuple[str | None, Any]]:
        # repr that excludes default values
        super_args = super().__repr_args__()
        if not self.model_config.get("repr_exclude_defaults"):
            yield from super_args
            return

        fields = type(self).model_fields
        for key, val in super_args:
            if key in fields:
                default = fields[key].get_default(
                    call_default_factory=True, validated_data={}
                )
                with suppress(Exception):
                    if bool(val == default):
                        continue
            yield key, val
