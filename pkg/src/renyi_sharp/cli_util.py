from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, Dict, List, Optional

from pydantic import ValidationError
from typer import BadParameter

from .models import OutputFormat
from .quantum import (
    QChannel,
    QState,
    amplitude_damping,
    dephasing,
    depolarizing,
    identity_channel,
    replacer,
)

MAX_GRID_POINTS = 100_000


def _decimal(text: str, what: str) -> Decimal:
    try:
        value = Decimal(text.strip())
    except InvalidOperation:
        raise BadParameter(f"Invalid number '{text}' in {what}")
    if not value.is_finite():
        raise BadParameter(f"Non-finite number '{text}' in {what}")
    return value


def parse_grid(spec: Optional[str], what: str = "grid") -> List[float]:
    """Parse 'a,b,c' or the inclusive range 'start:stop:step'.

    Ranges are expanded in exact decimal arithmetic so '1.1:2.0:0.1' yields
    exactly the ten values 1.1, 1.2, ..., 2.0.

    Raises:
        BadParameter: If the format is invalid or the step is not positive
    """
    if spec is None or not spec.strip():
        return []

    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise BadParameter(
                f"Invalid {what} '{spec}'. "
                "Expected 'start:stop:step' (e.g., '1.1:2.0:0.1')"
            )
        start, stop, step = (_decimal(p, what) for p in parts)
        if step <= 0:
            raise BadParameter(f"Step of {what} '{spec}' must be positive")
        if stop < start:
            raise BadParameter(f"Empty {what} '{spec}': stop is below start")
        count = int((stop - start) / step) + 1
        if count > MAX_GRID_POINTS:
            raise BadParameter(
                f"{what} '{spec}' has more than {MAX_GRID_POINTS} points"
            )
        return [float(start + k * step) for k in range(count)]

    return [float(_decimal(item, what)) for item in spec.split(",") if item.strip()]


def parse_int_list(spec: Optional[str], what: str = "list") -> List[int]:
    """Parse '1,2,3' or 'start:stop:step' into integers."""
    values = parse_grid(spec, what)
    result = []
    for value in values:
        if value != int(value):
            raise BadParameter(f"{what} expects integers, got {value:g}")
        result.append(int(value))
    return result


def _float_argument(name: str, arg: str) -> float:
    try:
        return float(arg)
    except ValueError:
        raise BadParameter(f"Channel '{name}' expects a number, got '{arg}'")


def _replacer_from_file(path: str) -> QChannel:
    state = load_state(path)
    return replacer(state.op, state.dim)


def _named_channels() -> Dict[str, Callable[[str], QChannel]]:
    return {
        "ad": lambda arg: amplitude_damping(_float_argument("ad", arg)),
        "depol": lambda arg: depolarizing(_float_argument("depol", arg)),
        "dephase": lambda arg: dephasing(_float_argument("dephase", arg)),
        "identity": lambda arg: identity_channel(
            int(_float_argument("identity", arg or "2"))
        ),
        "replacer": _replacer_from_file,
    }


def parse_channel(spec: str) -> QChannel:
    """Parse a channel argument: 'ad:<γ>', 'depol:<p>', 'dephase:<p>',
    'identity:<d>', 'replacer:<state.json>' or a path to a channel JSON file.

    Raises:
        BadParameter: If the channel name, parameter or file is invalid
    """
    named = _named_channels()
    name, _, arg = spec.partition(":")
    if name in named:
        if not arg and name != "identity":
            raise BadParameter(f"Channel '{name}' needs a parameter, e.g. '{name}:0.5'")
        try:
            return named[name](arg)
        except BadParameter:
            raise
        except ValueError as e:
            raise BadParameter(f"Invalid channel '{spec}': {e}")

    path = Path(spec)
    if not path.exists():
        valid = ", ".join(f"{n}:<arg>" for n in named)
        raise BadParameter(f"Channel file '{spec}' not found. Named channels: {valid}")
    try:
        return QChannel.load(path)
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise BadParameter(f"Invalid channel file '{spec}': {e}")


def load_state(path: str) -> QState:
    """Load a state JSON file, reporting the file (and line for JSON errors).

    Raises:
        BadParameter: If the file is missing or malformed
    """
    if not Path(path).exists():
        raise BadParameter(f"State file '{path}' not found")
    try:
        return QState.load(path)
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise BadParameter(f"Invalid state file '{path}': {e}")


def parse_output_format(
    output_format: Optional[str], json_flag: bool = False
) -> OutputFormat:
    """Parse the --format argument; --json wins when given.

    Raises:
        BadParameter: If format is unknown
    """
    if json_flag:
        return OutputFormat.JSON
    if not output_format:
        return OutputFormat.CSV

    try:
        return OutputFormat(output_format.lower())
    except ValueError:
        valid_formats = ", ".join([f.value for f in OutputFormat])
        raise BadParameter(
            f"Invalid output format '{output_format}'. Valid formats: {valid_formats}"
        )


def parse_channel_family(name: str) -> Callable[[float], QChannel]:
    """One-parameter channel family for --channel in capacity sweeps.

    Raises:
        BadParameter: If the family is unknown
    """
    families: Dict[str, Callable[[float], QChannel]] = {
        "ad": amplitude_damping,
        "depol": depolarizing,
        "dephase": dephasing,
    }
    if name not in families:
        valid = ", ".join(families)
        raise BadParameter(f"Unknown channel family '{name}'. Valid families: {valid}")
    return families[name]
