"""
Instance files: JSON with fields {d, k, sigma, arms, theta_star, target_index}
and an optional boolean "unnormalized" that waives the unit-norm check the
same way the allow-unnormalized flag does.

Floats are written with Python's shortest round-trip repr, so a
save/load cycle reproduces every value bit for bit.
"""

import logging
import math

from src.environment.model import EnvironmentSpec, norm_violations
from src.utils.common import load_json_file, write_json_file
from src.utils.errors import InvalidEnvironment, ParseError

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("d", "k", "sigma", "arms", "theta_star", "target_index")
OPTIONAL_FIELDS = ("unnormalized",)


def instance_to_dict(env):
    """Serializable form of an environment; "unnormalized" only appears when set."""
    data = {
        "d": env.d,
        "k": env.k,
        "sigma": env.noise_sigma,
        "arms": env.arms.tolist(),
        "theta_star": env.theta_star.tolist(),
        "target_index": env.target_index,
    }
    if env.unnormalized:
        data["unnormalized"] = True
    return data


def _number(value, field, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ParseError(f"expected a finite number, got {value!r}", path=path, field=field)
    return float(value)


def _integer(value, field, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"expected an integer, got {value!r}", path=path, field=field)
    return value


def _vector(values, length, field, path):
    if not isinstance(values, list):
        raise ParseError(f"expected a list of {length} numbers", path=path, field=field)
    if len(values) != length:
        raise ParseError(f"expected {length} entries, got {len(values)}", path=path, field=field)
    return [_number(v, f"{field}[{i}]", path) for i, v in enumerate(values)]


def instance_from_dict(data, path=None, allow_unnormalized=False):
    """
    Validates a parsed instance and builds the environment.

    Args:
        data (dict): Parsed JSON.
        path (str, optional): Source file, for diagnostics.
        allow_unnormalized (bool): Accept vectors with norm above 1, as does
            an "unnormalized": true entry in data.

    Returns:
        EnvironmentSpec: The instance.

    Raises:
        ParseError: On a missing, malformed or inconsistent field.
    """
    if not isinstance(data, dict):
        raise ParseError("instance must be a JSON object", path=path)
    unknown = sorted(set(data) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS))
    if unknown:
        raise ParseError(f"unknown fields {unknown}", path=path, field=unknown[0])
    for field in REQUIRED_FIELDS:
        if field not in data:
            raise ParseError("missing field", path=path, field=field)

    d = _integer(data["d"], "d", path)
    k = _integer(data["k"], "k", path)
    if d < 1:
        raise ParseError(f"dimension must be >= 1, got {d}", path=path, field="d")
    if k < 2:
        raise ParseError(f"need at least 2 arms, got {k}", path=path, field="k")
    sigma = _number(data["sigma"], "sigma", path)

    arms = data["arms"]
    if not isinstance(arms, list) or len(arms) != k:
        raise ParseError(f"expected {k} arms", path=path, field="arms")
    arms = [_vector(arm, d, f"arms[{i}]", path) for i, arm in enumerate(arms)]
    theta = _vector(data["theta_star"], d, "theta_star", path)
    target = _integer(data["target_index"], "target_index", path)
    declared = data.get("unnormalized", False)
    if not isinstance(declared, bool):
        raise ParseError(f"expected true or false, got {declared!r}", path=path, field="unnormalized")
    allow_unnormalized = allow_unnormalized or declared

    try:
        env = EnvironmentSpec(
            arms=arms,
            target_index=target,
            theta_star=theta,
            noise_sigma=sigma,
            unnormalized=allow_unnormalized,
        )
    except InvalidEnvironment as e:
        raise ParseError(str(e), path=path) from e

    if allow_unnormalized:
        offending = norm_violations(env)
        if offending:
            logger.warning(f"Loaded unnormalized instance {path or ''}: {', '.join(offending)} exceed unit norm")
    return env


def load_instance(path, allow_unnormalized=False):
    """
    Loads an instance file.

    Args:
        path (str): Path to the JSON file.
        allow_unnormalized (bool): Accept vectors with norm above 1 (with a warning).

    Returns:
        EnvironmentSpec: The instance.
    """
    return instance_from_dict(load_json_file(path), path=path, allow_unnormalized=allow_unnormalized)


def save_instance(env, path):
    """Writes env to path as an instance file and returns the path."""
    return write_json_file(path, instance_to_dict(env))
