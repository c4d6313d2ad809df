"""Result emission: CSV artifacts and a plain-text summary.

Every emitted file starts with the same three header comments (tool
version, config hash, seed) and contains nothing run-dependent beyond
the results themselves, so a fixed seed reproduces files byte for byte.
"""

from __future__ import annotations

import csv
import statistics

from . import __version__
from .sim import RunResult, empirical_cdf, sample_deciles


def header_lines(config_sha256: str, seed: int) -> list[str]:
    return [
        f"# tool_version={__version__}",
        f"# config_sha256={config_sha256}",
        f"# seed={seed}",
    ]


def _open_with_header(path: str, config_sha256: str, seed: int):
    f = open(path, "w", newline="")
    for line in header_lines(config_sha256, seed):
        f.write(line + "\n")
    return f


def _fmt(x) -> str:
    # repr keeps full float precision and is stable across runs
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_samples_csv(path: str, run: RunResult, config_sha256: str) -> None:
    with _open_with_header(path, config_sha256, run.seed) as f:
        writer = csv.writer(f)
        writer.writerow(["iteration", "sum_utility"])
        for it in run.iterations:
            writer.writerow([it.index, _fmt(it.sum_utility)])


def write_cdf_csv(path: str, samples, config_sha256: str, seed: int) -> None:
    with _open_with_header(path, config_sha256, seed) as f:
        writer = csv.writer(f)
        writer.writerow(["sum_utility", "cumulative_probability"])
        for value, prob in empirical_cdf(samples):
            writer.writerow([_fmt(value), _fmt(prob)])


def write_user_metrics_csv(path: str, run: RunResult, config_sha256: str) -> None:
    with _open_with_header(path, config_sha256, run.seed) as f:
        writer = csv.writer(f)
        writer.writerow([
            "iteration", "user",
            "dl_rate_bps", "dl_mean_latency_s", "dl_loss_ratio", "dl_utility",
            "ul_rate_bps", "ul_mean_latency_s", "ul_loss_ratio", "ul_utility",
            "user_utility",
        ])
        for it in run.iterations:
            for u in it.users:
                writer.writerow([
                    it.index, u.user_id,
                    _fmt(u.dl.rate_bps), _fmt(u.dl.mean_latency_s),
                    _fmt(u.dl.loss_ratio), _fmt(u.dl.utility),
                    _fmt(u.ul.rate_bps), _fmt(u.ul.mean_latency_s),
                    _fmt(u.ul.loss_ratio), _fmt(u.ul.utility),
                    _fmt(u.utility),
                ])


def summary_text(run: RunResult, config_sha256: str) -> str:
    samples = run.sum_utility_samples
    lines = header_lines(config_sha256, run.seed)
    lines.append(f"grade: {run.grade.value}")
    lines.append(f"iterations: {len(samples)}")
    lines.append(f"sum_utility_mean: {_fmt(statistics.fmean(samples))}")
    lines.append(f"sum_utility_std: {_fmt(statistics.pstdev(samples))}")
    for q, value in zip(range(10, 100, 10), sample_deciles(samples)):
        lines.append(f"decile_{q}: {_fmt(value)}")
    return "\n".join(lines) + "\n"


def write_summary(path: str, run: RunResult, config_sha256: str) -> None:
    with open(path, "w") as f:
        f.write(summary_text(run, config_sha256))


def comparison_text(ultra: RunResult, normal: RunResult, config_sha256: str) -> str:
    """Per-decile comparison plus the dominance verdict line."""
    du = sample_deciles(ultra.sum_utility_samples)
    dn = sample_deciles(normal.sum_utility_samples)
    lines = header_lines(config_sha256, ultra.seed)
    for q, u, n in zip(range(10, 100, 10), du, dn):
        lines.append(f"decile_{q}: ultra={_fmt(u)} normal={_fmt(n)}")
    verdict = all(u >= n for u, n in zip(du, dn))
    lines.append(f"dominates: {'true' if verdict else 'false'}")
    return "\n".join(lines) + "\n"


def write_comparison(path: str, ultra: RunResult, normal: RunResult,
                     config_sha256: str) -> bool:
    text = comparison_text(ultra, normal, config_sha256)
    with open(path, "w") as f:
        f.write(text)
    return text.rstrip().endswith("dominates: true")
