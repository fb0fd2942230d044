"""Effective sample size, chain comparison and speed accounting."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp


@dataclass
class EssReport:
    per_dim: np.ndarray
    burn_in: float
    degenerate: bool
    elapsed_s: float = np.nan

    @property
    def minimum(self):
        return float(np.min(self.per_dim))

    @property
    def median(self):
        return float(np.median(self.per_dim))

    @property
    def maximum(self):
        return float(np.max(self.per_dim))

    @property
    def median_per_second(self):
        return self.median / self.elapsed_s


def _ess_1d(x):
    """ESS = n / (1 + 2 sum rho_k), lag sum truncated by Geyer's
    initial-positive-sequence rule (add consecutive-lag pairs while their sum
    stays positive). Autocovariances by direct summation."""
    n = x.shape[0]
    x = x - x.mean()
    c0 = float(x @ x) / n
    if c0 == 0.0:
        return 1.0, True
    tau = 1.0  # rho_0
    k = 1
    while k + 1 < n:
        rho_a = float(x[: n - k] @ x[k:]) / (n * c0)
        rho_b = float(x[: n - k - 1] @ x[k + 1 :]) / (n * c0)
        if rho_a + rho_b <= 0.0:
            break
        tau += 2.0 * (rho_a + rho_b)
        k += 2
    ess = n / tau
    return float(min(max(ess, 1.0), n)), False


def ess(draws, burn_in=0.1, elapsed_s=np.nan):
    """Per-dimension ESS after discarding the leading ``burn_in`` fraction.

    A constant chain is flagged degenerate with ESS 1. ``elapsed_s`` should be
    the phase-inclusive wall time when the report feeds speed-up accounting.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, None]
    drop = int(round(burn_in * draws.shape[0]))
    kept = draws[drop:]
    if kept.shape[0] < 100:
        raise ValueError("need at least 100 draws after burn-in removal")
    vals = []
    degenerate = False
    for j in range(kept.shape[1]):
        e, flat = _ess_1d(kept[:, j])
        vals.append(e)
        degenerate = degenerate or flat
    return EssReport(
        per_dim=np.array(vals),
        burn_in=burn_in,
        degenerate=degenerate,
        elapsed_s=elapsed_s,
    )


def compare_chains(draws_a, draws_b, burn_in=0.1):
    """Per-dimension KS distances plus mean/sd gaps in joint MC-SE units."""
    a = np.asarray(draws_a, dtype=float)
    b = np.asarray(draws_b, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape[1] != b.shape[1]:
        raise ValueError("chains have different dimension")
    a = a[int(round(burn_in * a.shape[0])) :]
    b = b[int(round(burn_in * b.shape[0])) :]
    ess_a = ess(a, burn_in=0.0)
    ess_b = ess(b, burn_in=0.0)
    d = a.shape[1]
    ks = np.empty(d)
    mean_gap_se = np.empty(d)
    sd_gap_se = np.empty(d)
    for j in range(d):
        ks[j] = ks_2samp(a[:, j], b[:, j]).statistic
        va, vb = np.var(a[:, j]), np.var(b[:, j])
        se_mean = np.sqrt(va / ess_a.per_dim[j] + vb / ess_b.per_dim[j])
        mean_gap_se[j] = abs(a[:, j].mean() - b[:, j].mean()) / se_mean
        # SE of a gaussian sd estimate: sd / sqrt(2 ess)
        se_sd = np.sqrt(
            va / (2 * ess_a.per_dim[j]) + vb / (2 * ess_b.per_dim[j])
        )
        sd_gap_se[j] = abs(np.sqrt(va) - np.sqrt(vb)) / se_sd
    return {
        "ks_distance": ks,
        "mean_gap_se_units": mean_gap_se,
        "sd_gap_se_units": sd_gap_se,
    }


def speed_report(entries, baseline=0, burn_in=0.1):
    """Tabulate acceptance, ESS triple, time, median ESS/s and speed-up.

    ``entries`` is a list of (label, chain); times charge every recorded
    phase (collection and training included for surrogate methods). Returns
    (rows, text_table); rows are plain dicts.
    """
    if not entries:
        raise ValueError("no chains to report")
    rows = []
    for label, chain in entries:
        total = chain.total_time()
        if not np.isfinite(total) or total <= 0:
            raise ValueError(f"chain {label!r} is missing wall-time records")
        rep = ess(chain.draws, burn_in=burn_in, elapsed_s=total)
        rows.append(
            {
                "label": label,
                "acceptance": chain.acceptance,
                "ess_min": rep.minimum,
                "ess_median": rep.median,
                "ess_max": rep.maximum,
                "cpu_time_s": total,
                "median_ess_per_s": rep.median_per_second,
            }
        )
    base_rate = rows[baseline]["median_ess_per_s"]
    for row in rows:
        row["speed_up"] = row["median_ess_per_s"] / base_rate
    return rows, format_speed_table(rows)


def format_speed_table(rows):
    header = ["Method", "AP", "ESS (min, med, max)", "CPU time", "Median ESS/s", "Speed-up"]
    lines = []
    for row in rows:
        lines.append(
            [
                row["label"],
                f"{row['acceptance']:.2f}",
                f"({row['ess_min']:.0f}, {row['ess_median']:.0f}, {row['ess_max']:.0f})",
                f"{row['cpu_time_s']:.1f}s",
                f"{row['median_ess_per_s']:.3g}",
                f"{row['speed_up']:.2f}",
            ]
        )
    widths = [max(len(header[j]), *(len(l[j]) for l in lines)) for j in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header)]
    out.extend(fmt.format(*line) for line in lines)
    return "\n".join(out)
