"""Cross-product sweeps over scenarios, written as CSV tables."""

from __future__ import annotations

import csv
import io
import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import ConfigError, ScenarioConfig, parse_bool, parse_config, parse_sections
from .metrics import SUMMARY_FIELDS, THROUGHPUT_FIELDS, MetricsReport, summary_row, throughput_rows
from .scenario import run_scenario

SWEEP_KEYS = {"node_count": "sweep", "protocol": "sweep", "inesh_enabled": "sweep",
              "seeds": "sweep"}


class CampaignError(RuntimeError):
    def __init__(self, cfg: ScenarioConfig, cause: BaseException):
        super().__init__(f"run failed for config {cfg!r}: {cause}")
        self.config = cfg


@dataclass(frozen=True)
class CampaignSpec:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    node_counts: tuple[int, ...] = ()
    protocols: tuple[str, ...] = ()
    inesh: tuple[bool, ...] = ()
    seeds: tuple[int, ...] = ()

    def configs(self) -> list[ScenarioConfig]:
        """Every run in the sweep; an empty axis keeps the base value."""
        axes = [
            self.node_counts or (self.base.node_count,),
            self.protocols or (self.base.protocol,),
            self.inesh or (self.base.inesh_enabled,),
            self.seeds or (self.base.seed,),
        ]
        return [self.base.but(node_count=n, protocol=p, inesh_enabled=i, seed=s)
                for n, p, i, s in itertools.product(*axes)]


def parse_campaign(text: str) -> CampaignSpec:
    """Scenario grammar plus a ``[sweep]`` section of comma-separated axes."""
    base_lines, sweep_lines, in_sweep = [], [], False
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith("["):
            in_sweep = stripped == "[sweep]"
        (sweep_lines if in_sweep else base_lines).append(line)
        if in_sweep:
            base_lines.append("")
        else:
            sweep_lines.append("")
    base = parse_config("\n".join(base_lines))
    raw = parse_sections("\n".join(sweep_lines), SWEEP_KEYS)

    def items(key, conv):
        if key not in raw:
            return ()
        value, lineno = raw[key]
        try:
            return tuple(conv(t.strip()) for t in value.split(",") if t.strip())
        except ValueError as e:
            raise ConfigError(str(e), key, lineno) from None

    spec = CampaignSpec(base, items("node_count", int), items("protocol", str.lower),
                        items("inesh_enabled", parse_bool), items("seeds", int))
    spec.configs()  # every combination must validate
    return spec


def _run(cfg: ScenarioConfig) -> tuple[MetricsReport, int]:
    result = run_scenario(cfg)
    return result.report, len(result.adversary.nodes)


def run_campaign(spec: CampaignSpec, out_dir: str | os.PathLike | None = None,
                 workers: int = 1) -> tuple[str, str]:
    """Run every config and return ``(summary_csv, throughput_csv)`` text.

    Rows are ordered by config index whatever the completion order.  Any
    failing run aborts the campaign with a :class:`CampaignError`.
    """
    configs = spec.configs()
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(_run, c) for c in configs]
            results = []
            for cfg, fut in zip(configs, futures):
                try:
                    results.append(fut.result())
                except Exception as e:
                    raise CampaignError(cfg, e) from e
    else:
        results = []
        for cfg in configs:
            try:
                results.append(_run(cfg))
            except Exception as e:
                raise CampaignError(cfg, e) from e

    summary_csv, throughput_csv = format_tables(
        (cfg, report, malicious) for cfg, (report, malicious) in zip(configs, results))
    if out_dir is not None:
        write_outputs(out_dir, summary_csv, throughput_csv)
    return summary_csv, throughput_csv


def format_tables(runs) -> tuple[str, str]:
    """CSV text for ``(config, report, malicious_count)`` triples, numbered in order."""
    summary, series = io.StringIO(), io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    tw = csv.writer(series, lineterminator="\n")
    sw.writerow(SUMMARY_FIELDS)
    tw.writerow(THROUGHPUT_FIELDS)
    for run_id, (cfg, report, malicious) in enumerate(runs):
        sw.writerow(summary_row(run_id, cfg, report, malicious))
        tw.writerows(throughput_rows(run_id, report))
    return summary.getvalue(), series.getvalue()


def write_outputs(out_dir, summary_csv: str, throughput_csv: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(summary_csv)
    (out / "throughput.csv").write_text(throughput_csv)
