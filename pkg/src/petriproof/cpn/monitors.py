"""Marking-size monitors."""

import csv
import io
from typing import Iterable, List, Optional

from ..models.cpn import MonitorKind, MonitorStats, stats_header


class Monitor:
    """
    Watches the number of tokens in one place.

    A discrete monitor averages over every observation. A time monitor
    counts only observations where the size changed and averages the size
    weighted by how long the clock stayed at it.
    """

    def __init__(self, place: str, kind: MonitorKind = "discrete"):
        if kind not in ("discrete", "time"):
            raise ValueError(f"Invalid monitor kind: {kind}. Must be one of ['discrete', 'time']")
        self.place = place
        self.kind = kind
        self.count = 0
        self.sum = 0.0
        self.min: Optional[float] = None
        self.max: Optional[float] = None
        self._first_clock: Optional[int] = None
        self._last_clock: Optional[int] = None
        self._last_size: Optional[int] = None
        self._integral = 0.0

    def _record(self, size: float) -> None:
        self.count += 1
        self.sum += size
        self.min = size if self.min is None else min(self.min, size)
        self.max = size if self.max is None else max(self.max, size)

    def observe(self, size: int, clock: int = 0) -> None:
        """Record the place's marking size at a clock value."""
        if self.kind == "discrete":
            self._record(size)
            return
        if self._last_size is None:
            self._first_clock = clock
            self._record(size)
        else:
            self._integral += self._last_size * (clock - self._last_clock)
            if size != self._last_size:
                self._record(size)
        self._last_size = size
        self._last_clock = clock

    def observe_all(self, sizes: Iterable[int]) -> "Monitor":
        for size in sizes:
            self.observe(size)
        return self

    @property
    def elapsed(self) -> int:
        if self._first_clock is None:
            return 0
        return self._last_clock - self._first_clock

    def time_average(self) -> Optional[float]:
        if self.count == 0:
            return None
        if self.elapsed == 0:
            return self.sum / self.count
        return self._integral / self.elapsed


def monitor_stats(monitor: Monitor) -> MonitorStats:
    """
    Summarise a monitor.

    With no observations the stats carry count 0 and no average, min or max.
    """
    if monitor.count == 0:
        return MonitorStats(place=monitor.place, kind=monitor.kind, count=0)
    average = monitor.sum / monitor.count if monitor.kind == "discrete" else monitor.time_average()
    return MonitorStats(
        place=monitor.place,
        kind=monitor.kind,
        count=monitor.count,
        sum=monitor.sum,
        average=average,
        min=monitor.min,
        max=monitor.max,
    )


def _number(value: Optional[float]) -> str:
    if value is None:
        return ""
    return str(int(value)) if float(value).is_integer() else f"{value:.6f}"


def stats_to_csv(stats: Iterable[MonitorStats]) -> str:
    """CSV with columns place,kind,count,sum,average,min,max."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(stats_header())
    for entry in stats:
        writer.writerow([
            entry.place,
            entry.kind,
            entry.count,
            _number(entry.sum),
            "" if entry.average is None else f"{entry.average:.6f}",
            _number(entry.min),
            _number(entry.max),
        ])
    return buffer.getvalue()


def monitors_for(places: Iterable[str], kind: MonitorKind = "discrete") -> List[Monitor]:
    """One monitor of the given kind per place."""
    return [Monitor(place, kind) for place in places]
