import pint
from marshmallow import ValidationError, fields

_registry = None


def get_registry():
    """
    Get or create the Pint unit registry used for clock frequencies
    """
    global _registry
    if not _registry:
        _registry = pint.UnitRegistry()
    return _registry


def parse_frequency(text):
    """
    Parse a frequency such as "250 MHz" into a pint Quantity in hertz.

    Raises:
        ValueError: if the text is not a frequency
    """
    try:
        quantity = get_registry().Quantity(text)
    except (pint.errors.PintError, AttributeError, TypeError, ValueError, SyntaxError) as error:
        raise ValueError(f"Invalid frequency '{text}'") from error
    if not isinstance(quantity, pint.Quantity) or not quantity.check("[frequency]"):
        raise ValueError(f"'{text}' is not a frequency")
    if quantity.magnitude <= 0:
        raise ValueError(f"Frequency '{text}' must be positive")
    return quantity.to("hertz")


class FrequencyField(fields.Field):
    """
    Marshmallow Field that serializes to a string
    and deserializes to a Pint frequency quantity.
    """

    def _serialize(self, value, attr, obj, **kwargs):
        if value is None:
            return None
        return f"{value.to_compact():~}"

    def _deserialize(self, value, attr, data, **kwargs):
        try:
            return parse_frequency(value)
        except ValueError as error:
            raise ValidationError(str(error)) from error
