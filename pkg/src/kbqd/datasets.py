"""Bundled dataset access.

The wireless indoor localization data (2000 observations of Wi-Fi signal
strength from 7 routers, with a room label 1..4 in the last column) is
not redistributed here; it is loaded from a local text file. Download
``wifi_localization.txt`` from the UCI Machine Learning Repository
("Wireless Indoor Localization" dataset) and either place it in a
``data/`` directory at the project root or point ``KBQD_WIRELESS_PATH``
at it.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

WIRELESS_ENV = "KBQD_WIRELESS_PATH"
WIRELESS_FILENAMES = ("wifi_localization.txt", "wireless.txt", "wireless.csv")


class DatasetNotFoundError(FileNotFoundError):
    pass


def _candidate_paths():
    env = os.environ.get(WIRELESS_ENV)
    if env:
        yield Path(env)
    here = Path(__file__).resolve()
    for base in (Path.cwd(), *here.parents):
        for name in WIRELESS_FILENAMES:
            yield base / "data" / name


def wireless_path() -> Path:
    for path in _candidate_paths():
        if path.is_file():
            return path
    raise DatasetNotFoundError(
        "wireless localization data not found; download "
        "'wifi_localization.txt' from the UCI repository and place it under "
        f"./data/ or set {WIRELESS_ENV}")


def load_wireless(path=None, normalize: bool = True):
    """Load the wireless localization data.

    Returns ``(x, labels)`` where ``x`` is the 2000x7 signal-strength
    matrix (L2-normalized rows unless ``normalize=False``) and ``labels``
    the room assignments 1..4.
    """
    file = Path(path) if path is not None else wireless_path()
    raw = np.loadtxt(file, delimiter=None if file.suffix != ".csv" else ",")
    if raw.ndim != 2 or raw.shape[1] != 8:
        raise ValueError(
            f"expected 8 columns (7 features + label), got shape {raw.shape}")
    x = raw[:, :7].astype(float)
    labels = raw[:, 7].astype(int)
    if normalize:
        x = x / np.linalg.norm(x, axis=1, keepdims=True)
    return x, labels
