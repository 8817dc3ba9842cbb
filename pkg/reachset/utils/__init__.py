from reachset.utils.helper_functions import (
    NumpyEncoder,
    as_vector,
    flatten_keys,
    get_value_of_nested_key,
    normalized,
    require_finite,
    wrap_angle,
)
from reachset.utils.workers import WorkerMap, worker_count

__all__ = [
    "NumpyEncoder",
    "as_vector",
    "flatten_keys",
    "get_value_of_nested_key",
    "normalized",
    "require_finite",
    "wrap_angle",
    "WorkerMap",
    "worker_count",
]
