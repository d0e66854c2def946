from marshmallow import ValidationError, fields

from llpm.datatypes import HWType
from llpm.errors import LlpmError
from llpm.type_syntax import parse_type, print_type


class HWTypeField(fields.Field):
    """
    Marshmallow Field that serializes to canonical type text
    and deserializes to an HWType.
    """

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return print_type(value)

    def _deserialize(self, value, attr, data, **kwargs):
        if isinstance(value, HWType):
            return value
        try:
            return parse_type(value)
        except LlpmError as error:
            raise ValidationError(f"Invalid type '{value}': {error}") from error
