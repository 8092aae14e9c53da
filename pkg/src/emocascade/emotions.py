"""The eight discrete emotion dimensions and small helpers around them."""

import numpy as np

EMOTIONS = (
    "anger",
    "anxiety",
    "sadness",
    "disgust",
    "joy",
    "love",
    "surprise",
    "anticipation",
)
N_EMOTIONS = len(EMOTIONS)
EMOTION_INDEX = {name: i for i, name in enumerate(EMOTIONS)}


def emotion_vector(values=None, **named):
    """Build a length-8 float array from a sequence or from keyword intensities.

    >>> emotion_vector(joy=0.5)[EMOTION_INDEX["joy"]]
    0.5
    """
    out = np.zeros(N_EMOTIONS)
    if values is not None:
        arr = np.asarray(values, dtype=float)
        if arr.shape != (N_EMOTIONS,):
            raise ValueError(f"expected {N_EMOTIONS} intensities, got shape {arr.shape}")
        out[:] = arr
    for name, value in named.items():
        out[EMOTION_INDEX[name]] = value
    return out
