"""
Monte Carlo oracle of the reachable set: endpoints of random piecewise-constant admissible controls.

Each constant piece is integrated exactly. A planar piece with curvature u over a duration d
turns the heading by u d and moves along the chord of that arc; a spatial piece with curvature
magnitude m in direction d_u (orthogonal to the tangent) is the planar arc of curvature m in the
plane spanned by the tangent and d_u.
"""
import math
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from reachset.config import default_kappa_max, default_oracle_pieces, default_oracle_samples, logger, oracle_chunk_size
from reachset.exceptions import InvalidInput
from reachset.families import canonical_base
from reachset.geometry import Config3, reference_normals
from reachset.reach.cloud import Mode, OracleCloud
from reachset.utils.helper_functions import require_finite
from reachset.utils.workers import WorkerMap, worker_count


def _chord(turn: np.ndarray, duration: float) -> Tuple[np.ndarray, np.ndarray]:
    # chord length of an arc of given turn and length, and its angle to the initial tangent
    return duration * np.sinc(turn / (2.0 * math.pi)), 0.5 * turn


def integrate_piecewise_controls(mode: Mode, controls: np.ndarray, t_f: float,
                                 base: Optional[Config3] = None) -> np.ndarray:
    """
    Endpoints of piecewise-constant controls with equal piece durations t_f / n_pieces.
    :param mode: problem mode
    :param controls: 2D (N, n_pieces) signed curvatures; 3D (N, n_pieces, 2) with (angle, magnitude),
        where the angle locates the curvature direction on the tangent circle
    :param t_f: total duration
    :param base: 3D start configuration (default origin heading +x); 2D starts at the origin heading +x
    :return: (N, endpoint_size) endpoint-space coordinates
    """
    mode = Mode.parse(mode)
    controls = np.asarray(controls, dtype=float)
    duration = t_f / controls.shape[1]
    count = controls.shape[0]
    if mode.dim == 2:
        x, y, theta = np.zeros(count), np.zeros(count), np.zeros(count)
        for k in range(controls.shape[1]):
            turn = controls[:, k] * duration
            chord, angle = _chord(turn, duration)
            x = x + chord * np.cos(theta + angle)
            y = y + chord * np.sin(theta + angle)
            theta = theta + turn
        columns = [x, y, theta] if mode.with_direction else [x, y]
        return np.column_stack(columns)

    base = canonical_base() if base is None else base
    r = np.tile(base.r, (count, 1))
    e = np.tile(base.e, (count, 1))
    for k in range(controls.shape[1]):
        n1 = reference_normals(e)
        n2 = np.cross(e, n1)
        angle = controls[:, k, 0:1]
        d = np.cos(angle) * n1 + np.sin(angle) * n2
        turn = controls[:, k, 1] * duration
        chord, half = _chord(turn, duration)
        r = r + chord[:, None] * (np.cos(half)[:, None] * e + np.sin(half)[:, None] * d)
        e = np.cos(turn)[:, None] * e + np.sin(turn)[:, None] * d
        e = e / np.linalg.norm(e, axis=1, keepdims=True)
    return np.hstack([r, e]) if mode.with_direction else r


def _oracle_chunk(task) -> np.ndarray:
    mode_value, t_f, size, n_pieces, seed_sequence, kappa_max, base_array = task
    mode = Mode(mode_value)
    rng = np.random.default_rng(seed_sequence)
    if mode.dim == 2:
        controls = rng.uniform(-kappa_max, kappa_max, size=(size, n_pieces))
        return integrate_piecewise_controls(mode, controls, t_f)
    controls = np.stack([rng.uniform(0.0, 2.0 * math.pi, size=(size, n_pieces)),
                         rng.uniform(0.0, kappa_max, size=(size, n_pieces))], axis=2)
    base = Config3(base_array[0:3], base_array[3:6])
    return integrate_piecewise_controls(mode, controls, t_f, base)


def mc_oracle(mode: Mode, t_f: float, n_samples: int = default_oracle_samples, n_pieces: int = default_oracle_pieces,
              seed: int = 0, kappa_max: float = default_kappa_max, jobs: Optional[int] = None,
              chunk_size: int = oracle_chunk_size, base: Optional[Config3] = None,
              progress: bool = False) -> OracleCloud:
    """
    Samples endpoints of random admissible controls.

    Samples are drawn in chunks; chunk i uses the i-th child of SeedSequence(seed), so the
    cloud is identical for any number of workers.
    :param mode: problem mode
    :param t_f: duration > 0
    :param n_samples: number of samples (0 gives an empty cloud)
    :param n_pieces: constant pieces per control >= 1
    :param seed: root seed
    :param kappa_max: curvature bound
    :param jobs: worker processes (None reads REACHSET_THREADS)
    :param chunk_size: samples per chunk
    :param base: 3D start configuration
    :param progress: show a progress bar over chunks
    :return: the OracleCloud
    """
    mode = Mode.parse(mode)
    require_finite("mc_oracle", t_f, kappa_max)
    if t_f <= 0.0:
        raise InvalidInput(f"t_f must be > 0, got {t_f}")
    if kappa_max <= 0.0:
        raise InvalidInput(f"kappa_max must be > 0, got {kappa_max}")
    if n_samples < 0 or n_pieces < 1 or chunk_size < 1:
        raise InvalidInput(f"need n_samples >= 0, n_pieces >= 1 and chunk_size >= 1, "
                           f"got {n_samples}, {n_pieces}, {chunk_size}")
    if mode.dim == 2:
        model = f"uniform curvature on [-{kappa_max:g}, {kappa_max:g}], {n_pieces} equal pieces"
    else:
        model = f"uniform angle on the tangent circle, uniform magnitude on [0, {kappa_max:g}], {n_pieces} equal pieces"
    if n_samples == 0:
        return OracleCloud(np.zeros((0, mode.endpoint_size)), t_f, mode, seed, 0, n_pieces, kappa_max, model)

    base = canonical_base() if base is None else base
    sizes = [chunk_size] * (n_samples // chunk_size)
    if n_samples % chunk_size:
        sizes.append(n_samples % chunk_size)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(mode.value, float(t_f), size, int(n_pieces), child, float(kappa_max), base.as_array())
             for size, child in zip(sizes, children)]
    jobs = min(worker_count(jobs), len(tasks))
    logger.info(f"sampling {n_samples} {mode.value} oracle endpoints in {len(tasks)} chunks on {jobs} workers")
    with WorkerMap(jobs) as map_function:
        chunks = map_function(_oracle_chunk, tqdm(tasks, desc="oracle", disable=not progress))
    return OracleCloud(np.concatenate(chunks), t_f, mode, seed, n_samples, n_pieces, kappa_max, model)
