"""Sliding character windows for contexts longer than a model's limit.

Windows overlap by half the window size (stride = window // 2) so any span
short enough to fit inside one stride appears whole in at least one window.
Per-window results map back to original offsets by adding the window start.
"""

from __future__ import annotations


def char_windows(text: str, window: int, stride: int | None = None) -> list[tuple[int, str]]:
    """(start_offset, chunk) pairs covering ``text``; stride defaults to window // 2."""
    if window < 2:
        raise ValueError("window must be at least 2 characters")
    if stride is None:
        stride = window // 2
    if stride < 1:
        raise ValueError("stride must be positive")
    if len(text) <= window:
        return [(0, text)]
    windows = []
    start = 0
    while True:
        windows.append((start, text[start : start + window]))
        if start + window >= len(text):
            break
        start += stride
    return windows
