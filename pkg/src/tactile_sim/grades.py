"""Grade-of-service metric definitions, thresholds, and compliance checks.

An interface trace records access attempts, sent PDUs and delivered PDUs.
Availability is the granted fraction of access attempts, reliability the
fraction of fixed-size PDUs delivered within a deadline, and latency
compliance uses a nearest-rank percentile of delivery delays. Probability
thresholds are strict ("greater than"); the latency bound is inclusive.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np


class Grade(enum.Enum):
    ULTRA = "ultra"
    NORMAL = "normal"


@dataclass(frozen=True)
class GradeSpec:
    grade: Grade
    availability_min: float
    reliability_min: float
    latency_fraction: float
    device_min: int
    device_max: int

    def __post_init__(self):
        if not 0.0 < self.availability_min < 1.0:
            raise ValueError("availability_min must be in (0, 1)")
        if not 0.0 < self.reliability_min < 1.0:
            raise ValueError("reliability_min must be in (0, 1)")
        if not 0.0 < self.latency_fraction <= 1.0:
            raise ValueError("latency_fraction must be in (0, 1]")
        if self.device_min > self.device_max:
            raise ValueError("device_min must be <= device_max")


_GRADE_TABLE = {
    Grade.ULTRA: GradeSpec(Grade.ULTRA, 0.9999999, 0.99999, 0.10, 1, 50),
    Grade.NORMAL: GradeSpec(Grade.NORMAL, 0.99999, 0.9999, 0.50, 50, 100),
}


def grade_spec(grade: Grade | str) -> GradeSpec:
    """Threshold set for one service grade."""
    if isinstance(grade, str):
        grade = Grade(grade.lower())
    return _GRADE_TABLE[grade]


# Event record views. The trace itself stores columns (see InterfaceTrace);
# these exist for construction and for the audit CSV.
@dataclass(frozen=True)
class AttemptAccess:
    time: float
    granted: bool


@dataclass(frozen=True)
class PduSent:
    time: float
    pdu_id: int
    size: int  # bits


@dataclass(frozen=True)
class PduDelivered:
    time: float
    pdu_id: int
    delay: float  # seconds


TraceEvent = AttemptAccess | PduSent | PduDelivered


@dataclass
class InterfaceTrace:
    """Columnar event log for one interface.

    Traces can hold 10^6+ events per run, so events live in numpy arrays
    rather than object lists; from_events/events() give the record view.
    """

    attempt_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    attempt_granted: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=bool))
    sent_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    sent_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    sent_sizes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    delivered_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    delivered_ids: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    delivered_delays: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if len(self.delivered_ids) and not np.all(
                np.isin(self.delivered_ids, self.sent_ids)):
            raise ValueError("delivered ids must be a subset of sent ids")
        for times in (self.attempt_times, self.sent_times, self.delivered_times):
            if len(times) > 1 and np.any(np.diff(times) < 0):
                raise ValueError("event times must be non-decreasing")

    @classmethod
    def from_events(cls, events: Iterable[TraceEvent]) -> "InterfaceTrace":
        at, ag, st, si, ss, dt, di, dd = [], [], [], [], [], [], [], []
        for ev in events:
            if isinstance(ev, AttemptAccess):
                at.append(ev.time)
                ag.append(ev.granted)
            elif isinstance(ev, PduSent):
                st.append(ev.time)
                si.append(ev.pdu_id)
                ss.append(ev.size)
            elif isinstance(ev, PduDelivered):
                dt.append(ev.time)
                di.append(ev.pdu_id)
                dd.append(ev.delay)
            else:
                raise TypeError(f"unknown trace event {ev!r}")
        return cls(
            np.asarray(at, dtype=float), np.asarray(ag, dtype=bool),
            np.asarray(st, dtype=float), np.asarray(si, dtype=np.int64),
            np.asarray(ss, dtype=np.int64),
            np.asarray(dt, dtype=float), np.asarray(di, dtype=np.int64),
            np.asarray(dd, dtype=float),
        )

    def events(self) -> Iterator[TraceEvent]:
        """All events merged in time order."""
        recs: list[tuple[float, int, TraceEvent]] = []
        for t, g in zip(self.attempt_times, self.attempt_granted):
            recs.append((float(t), 0, AttemptAccess(float(t), bool(g))))
        for t, i, s in zip(self.sent_times, self.sent_ids, self.sent_sizes):
            recs.append((float(t), 1, PduSent(float(t), int(i), int(s))))
        for t, i, d in zip(self.delivered_times, self.delivered_ids, self.delivered_delays):
            recs.append((float(t), 2, PduDelivered(float(t), int(i), float(d))))
        recs.sort(key=lambda r: (r[0], r[1]))
        return iter(ev for _, _, ev in recs)


@dataclass(frozen=True)
class MetricResult:
    name: str
    measured: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ComplianceReport:
    grade: Grade
    metrics: tuple[MetricResult, ...]
    overall_pass: bool

    def __post_init__(self):
        if self.overall_pass != all(m.passed for m in self.metrics):
            raise ValueError("overall pass must equal the conjunction of metrics")

    def metric(self, name: str) -> MetricResult:
        for m in self.metrics:
            if m.name == name:
                return m
        raise KeyError(name)


def measure_availability(trace: InterfaceTrace) -> float:
    """Granted fraction of access attempts."""
    n = len(trace.attempt_times)
    if n == 0:
        raise ValueError("trace has no access attempts")
    return float(np.count_nonzero(trace.attempt_granted)) / n


def measure_reliability(trace: InterfaceTrace, pdu_size: int, deadline: float) -> float:
    """Fraction of sent PDUs delivered with delay <= deadline."""
    if len(trace.sent_ids) == 0:
        raise ValueError("trace has no sent PDUs")
    if np.any(trace.sent_sizes != pdu_size):
        raise ValueError("trace contains PDUs of a different size")
    in_time = trace.delivered_ids[trace.delivered_delays <= deadline]
    ok = np.intersect1d(trace.sent_ids, in_time)
    return len(ok) / len(trace.sent_ids)


def measure_latency_percentile(trace: InterfaceTrace, q: float) -> float:
    """Nearest-rank q-th percentile of delivery delays; lost PDUs excluded."""
    delays = trace.delivered_delays
    if len(delays) == 0:
        raise ValueError("trace has no delivered PDUs")
    if not 0.0 < q <= 100.0:
        raise ValueError("q must be in (0, 100]")
    rank = max(1, math.ceil(q / 100.0 * len(delays)))
    return float(np.sort(delays)[rank - 1])


def check_thresholds(
    spec: GradeSpec,
    availability: float,
    reliability: float,
    latency_p99: float,
    e2e_budget: float,
    n_devices: int,
) -> ComplianceReport:
    """Compare already-measured values against one grade's thresholds."""
    deadline = spec.latency_fraction * e2e_budget
    metrics = (
        MetricResult("availability", availability, spec.availability_min,
                     availability > spec.availability_min),
        MetricResult("reliability", reliability, spec.reliability_min,
                     reliability > spec.reliability_min),
        MetricResult("latency_p99", latency_p99, deadline,
                     latency_p99 <= deadline),
        MetricResult("scalability", float(n_devices), float(spec.device_max),
                     spec.device_min <= n_devices <= spec.device_max),
    )
    return ComplianceReport(spec.grade, metrics, all(m.passed for m in metrics))


def check_compliance(
    trace: InterfaceTrace,
    grade: Grade | str,
    e2e_budget: float,
    n_devices: int,
    pdu_size: int | None = None,
    latency_percentile: float = 99.0,
) -> ComplianceReport:
    """Measure a trace and compare it against one grade.

    The interface deadline is latency_fraction * e2e_budget; probability
    thresholds are strict.
    """
    spec = grade_spec(grade)
    if pdu_size is None:
        sizes = np.unique(trace.sent_sizes)
        if len(sizes) != 1:
            raise ValueError("trace contains PDUs of a different size")
        pdu_size = int(sizes[0])
    deadline = spec.latency_fraction * e2e_budget
    availability = measure_availability(trace)
    reliability = measure_reliability(trace, pdu_size, deadline)
    latency = measure_latency_percentile(trace, latency_percentile)
    return check_thresholds(spec, availability, reliability, latency,
                            e2e_budget, n_devices)


def export_trace_csv(trace: InterfaceTrace, path: str) -> None:
    """Flat audit CSV: time, event, then event-specific fields."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["time", "event", "granted", "pdu_id", "size", "delay"])
        for ev in trace.events():
            if isinstance(ev, AttemptAccess):
                writer.writerow([ev.time, "attempt", int(ev.granted), "", "", ""])
            elif isinstance(ev, PduSent):
                writer.writerow([ev.time, "sent", "", ev.pdu_id, ev.size, ""])
            else:
                writer.writerow([ev.time, "delivered", "", ev.pdu_id, "", ev.delay])
