import json
from typing import Any, List, Union

import numpy as np

from reachset.exceptions import InvalidInput


def get_value_of_nested_key(dictionary: dict, key: str, default: Any = None) -> Any:
    """
    this function iterates through a nested dictionary based on a dot ('.') notation of nested dictionary keys.
    :param dictionary: the dictionary in which to perform the lookup
    :param key: a dot notation string representing the dictionary key hierarchy from root to desired key
    :param default: what to return in case the desired key is not present in the dictionary
    :return: the value of the key if found in dictionary, and otherwise return the default value
    """
    for part in key.split('.'):
        # a [i] suffix indexes a list, only supported on the last level
        if '[' in part:
            part, index = part.split('[', 1)
            index = int(index[:-1])
            if not isinstance(dictionary, dict) or part not in dictionary:
                return default
            li = dictionary[part]
            if not isinstance(li, list) or len(li) <= index:
                return default
            return li[index]
        if not isinstance(dictionary, dict) or part not in dictionary:
            return default
        dictionary = dictionary[part]
    return dictionary


def flatten_keys(dictionary: dict, prefix: str = '') -> List[str]:
    """
    lists the dot notation keys of every leaf of a nested dictionary.
    :param dictionary: the dictionary to flatten
    :param prefix: key prefix of the current level
    :return: the dot notation keys, in insertion order
    """
    keys = []
    for key, value in dictionary.items():
        full_key = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict) and value:
            keys.extend(flatten_keys(value, full_key))
        else:
            keys.append(full_key)
    return keys


def wrap_angle(theta: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    wraps an angle (or an array of angles) to (-pi, pi], ties at -pi map to +pi.
    :param theta: angle in radians
    :return: the wrapped angle, a float for scalar input
    """
    wrapped = np.mod(np.asarray(theta, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def as_vector(value: Any, size: int, name: str = "vector") -> np.ndarray:
    """
    converts a value into a finite float vector of the given size.
    :param value: any array-like
    :param size: required length
    :param name: name used in the error message
    :return: a new float64 array of shape (size,)
    """
    try:
        vector = np.array(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"{name} is not numeric: {value!r}") from e
    if vector.shape != (size,):
        raise InvalidInput(f"{name} must have {size} components, got {vector.size}")
    if not np.all(np.isfinite(vector)):
        raise InvalidInput(f"{name} has non-finite components: {vector}")
    return vector


def normalized(value: Any, name: str = "vector") -> np.ndarray:
    """
    returns the unit vector along value.
    :param value: a finite 3-vector
    :param name: name used in the error message
    :return: value / ||value||
    """
    vector = as_vector(value, 3, name)
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        raise InvalidInput(f"{name} is the zero vector")
    return vector / norm


def require_finite(name: str, *values: float) -> None:
    """raises InvalidInput when any of the scalar values is not finite."""
    for value in values:
        if not np.isfinite(value):
            raise InvalidInput(f"{name} must be finite, got {value}")


class NumpyEncoder(json.JSONEncoder):
    """JSON encoder for numpy scalars and arrays."""
    def default(self, obj):
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        return super().default(obj)
