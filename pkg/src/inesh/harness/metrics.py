"""Throughput series, delivery ratio and the fixed-decimal CSV rows built from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

SCHEMA_VERSION = 1
THROUGHPUT_WINDOW = 10.0
DROP_REASONS = ("blackhole", "dropper", "noroute", "linkbreak")


def windowed_bits(deliveries: Iterable[tuple[float, int]], window: float,
                  horizon: float) -> list[tuple[float, float, int]]:
    """``(start, end, bits)`` for contiguous half-open windows ``[k*w, (k+1)*w)``.

    The last window is clipped at ``horizon``; deliveries at or after the
    horizon are ignored.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")
    count = max(1, math.ceil(horizon / window - 1e-12))
    bits = [0] * count
    for t, b in deliveries:
        k = int(t // window)
        if 0 <= k < count and t < horizon:
            bits[k] += b
    return [(k * window, min((k + 1) * window, horizon), bits[k]) for k in range(count)]


def compute_throughput(deliveries: Iterable[tuple[float, int]], window: float,
                       horizon: float) -> list[tuple[float, float]]:
    """Delivered bits per second for each window, keyed by window end."""
    return [(end, b / (end - start) if end > start else 0.0)
            for start, end, b in windowed_bits(deliveries, window, horizon)]


def cumulative_bits(deliveries: Iterable[tuple[float, int]], window: float,
                    horizon: float) -> list[int]:
    """Running total of delivered bits at each window end."""
    total, out = 0, []
    for _, _, b in windowed_bits(deliveries, window, horizon):
        total += b
        out.append(total)
    return out


@dataclass
class MetricsReport:
    sent: int
    delivered: int
    dropped: int
    in_flight: int
    control_packets: int
    throughput_series: list[tuple[float, float]]
    cumulative_bits: list[int]
    mean_end_to_end_delay: float
    drops_by_reason: dict[str, int] = field(default_factory=dict)

    @property
    def pdr(self) -> float:
        # no traffic counts as a perfect ratio
        return self.delivered / self.sent if self.sent else 1.0

    @property
    def pdr_exact(self) -> Fraction:
        return Fraction(self.delivered, self.sent) if self.sent else Fraction(1)

    @property
    def routing_overhead(self) -> float:
        return self.control_packets / max(self.delivered, 1)

    @property
    def final_cumulative_bits(self) -> int:
        return self.cumulative_bits[-1] if self.cumulative_bits else 0

    @property
    def conserved(self) -> bool:
        return self.sent == self.delivered + self.dropped + self.in_flight


SUMMARY_FIELDS = ("schema_version", "run_id", "protocol", "inesh", "node_count", "seed",
                  "duration_s", "malicious", "sent", "delivered", "dropped", "in_flight",
                  "pdr", "mean_delay_s", "control_packets", "routing_overhead",
                  "final_cumulative_bits") + tuple(f"drops_{r}" for r in DROP_REASONS)

THROUGHPUT_FIELDS = ("run_id", "window_end_s", "bits_per_s", "cumulative_bits")


def summary_row(run_id: int, cfg, report: MetricsReport, malicious: int) -> list[str]:
    return [
        str(SCHEMA_VERSION), str(run_id), cfg.protocol, str(int(cfg.inesh_enabled)),
        str(cfg.node_count), str(cfg.seed), f"{cfg.duration_s:.3f}", str(malicious),
        str(report.sent), str(report.delivered), str(report.dropped), str(report.in_flight),
        f"{report.pdr:.6f}", f"{report.mean_end_to_end_delay:.6f}", str(report.control_packets),
        f"{report.routing_overhead:.6f}", str(report.final_cumulative_bits),
    ] + [str(report.drops_by_reason.get(r, 0)) for r in DROP_REASONS]


def throughput_rows(run_id: int, report: MetricsReport) -> list[list[str]]:
    return [[str(run_id), f"{end:.3f}", f"{rate:.3f}", str(cum)]
            for (end, rate), cum in zip(report.throughput_series, report.cumulative_bits)]
