"""Panel containers and the least-squares single break-point scan.

The estimator splits the sample at every admissible index k, fits a
constant mean to each side of the split in every series, and picks the
split with the smallest pooled within-segment sum of squares.  The scan
is computed with running prefix sums of X so the whole candidate profile
costs O(n*p).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError

DEFAULT_TRIM = 0.05


def _label_sort_key(labels):
    """Return an orderable representation of the labels, or None.

    Numeric labels compare as floats, date-like labels as datetimes.
    Anything else is left unordered (only distinctness is enforced).
    """
    try:
        return np.asarray([float(x) for x in labels])
    except (TypeError, ValueError):
        pass
    try:
        return np.array(list(labels), dtype="datetime64[s]")
    except ValueError:
        return None


@dataclass
class PanelData:
    """An n x p panel of observations, optionally labelled.

    values : (n, p) float array, one row per time point, one column per
        series.  Requires n >= 4, p >= 1, all entries finite.
    time_labels : optional list of n strings, strictly increasing when
        they parse as numbers or dates.
    series_labels : optional list of p strings.
    """

    values: np.ndarray
    time_labels: list | None = None
    series_labels: list | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DataError("panel values must be a 2-d array")
        n, p = self.values.shape
        if n < 4:
            raise DataError(f"panel needs at least 4 rows, got {n}")
        if p < 1:
            raise DataError("panel needs at least one series")
        if not np.all(np.isfinite(self.values)):
            raise DataError("panel contains non-finite values")
        if self.time_labels is not None:
            self.time_labels = [str(x) for x in self.time_labels]
            if len(self.time_labels) != n:
                raise DataError("time_labels length does not match row count")
            key = _label_sort_key(self.time_labels)
            if key is not None:
                if not np.all(key[1:] > key[:-1]):
                    raise DataError("time labels must be strictly increasing")
            elif len(set(self.time_labels)) != n:
                raise DataError("time labels must be distinct")
        if self.series_labels is not None:
            self.series_labels = [str(x) for x in self.series_labels]
            if len(self.series_labels) != p:
                raise DataError("series_labels length does not match column count")

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    def labels_or_default(self):
        if self.time_labels is not None:
            return list(self.time_labels)
        return [str(i) for i in range(self.n)]

    def series_or_default(self):
        if self.series_labels is not None:
            return list(self.series_labels)
        return [f"s{i + 1}" for i in range(self.p)]

    def slice_rows(self, start, stop):
        """Sub-panel of rows [start, stop), labels carried along."""
        labels = self.time_labels[start:stop] if self.time_labels else None
        return PanelData(self.values[start:stop].copy(), labels, self.series_labels)

    @classmethod
    def from_csv(cls, source):
        """Read a panel from CSV: header row, column 1 = time label, columns 2.. = series."""
        try:
            df = pd.read_csv(source, dtype={0: str})
        except Exception as exc:
            raise DataError(f"could not parse panel CSV: {exc}") from None
        if df.shape[1] < 2:
            raise DataError("panel CSV needs a label column plus at least one series")
        labels = df.iloc[:, 0].astype(str).tolist()
        series = [str(c) for c in df.columns[1:]]
        try:
            values = df.iloc[:, 1:].to_numpy(dtype=float)
        except (TypeError, ValueError) as exc:
            raise DataError(f"non-numeric series values: {exc}") from None
        return cls(values, time_labels=labels, series_labels=series)

    def to_csv(self, target):
        df = pd.DataFrame(self.values, columns=self.series_or_default())
        df.insert(0, "date", self.labels_or_default())
        df.to_csv(target, index=False, lineterminator="\n")


@dataclass
class ChangePointFit:
    """Result of the least-squares break scan.

    k_hat is the size of the left segment (rows 1..k_hat before the
    break), tau_hat = k_hat / n, and profile_k / profile_value hold the
    criterion over the whole trimmed candidate grid.
    """

    k_hat: int
    tau_hat: float
    mu1_hat: np.ndarray
    mu2_hat: np.ndarray
    trim: float
    n: int
    profile_k: np.ndarray = field(repr=False)
    profile_value: np.ndarray = field(repr=False)

    def to_json(self, indent=None):
        payload = {
            "tau_hat": self.tau_hat,
            "k_hat": int(self.k_hat),
            "n": int(self.n),
            "trim": self.trim,
            "mu1_hat": np.asarray(self.mu1_hat).tolist(),
            "mu2_hat": np.asarray(self.mu2_hat).tolist(),
            "profile": {
                "k": np.asarray(self.profile_k).tolist(),
                "criterion": np.asarray(self.profile_value).tolist(),
            },
        }
        return json.dumps(payload, indent=indent)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            k_hat=int(d["k_hat"]),
            tau_hat=float(d["tau_hat"]),
            mu1_hat=np.asarray(d["mu1_hat"], dtype=float),
            mu2_hat=np.asarray(d["mu2_hat"], dtype=float),
            trim=float(d["trim"]),
            n=int(d["n"]),
            profile_k=np.asarray(d["profile"]["k"], dtype=int),
            profile_value=np.asarray(d["profile"]["criterion"], dtype=float),
        )

    def profile_frame(self, time_labels=None):
        """Profile as a two-column DataFrame (date, criterion), plot-ready."""
        if time_labels is not None:
            # candidate k corresponds to a break after row k, report the
            # label of the last left-segment row
            dates = [time_labels[k - 1] for k in self.profile_k]
        else:
            dates = [str(k) for k in self.profile_k]
        return pd.DataFrame({"date": dates, "criterion": self.profile_value})


def _check_k(n, k):
    k = int(k)
    if not 1 <= k <= n - 1:
        raise ConfigError(f"break index k={k} out of range [1, {n - 1}]")
    return k


def segment_means(panel: PanelData, k):
    """Per-series means of rows 1..k and rows k+1..n."""
    k = _check_k(panel.n, k)
    X = panel.values
    return X[:k].mean(axis=0), X[k:].mean(axis=0)


def lsq_criterion(panel: PanelData, k):
    """Pooled within-segment sum of squared deviations, divided by n."""
    k = _check_k(panel.n, k)
    X = panel.values
    mu1, mu2 = segment_means(panel, k)
    ss = ((X[:k] - mu1) ** 2).sum() + ((X[k:] - mu2) ** 2).sum()
    return ss / panel.n


def candidate_range(n, trim):
    """Admissible break indices under a symmetric trimming fraction."""
    if not 0 < trim < 0.5:
        raise ConfigError(f"trim must be in (0, 0.5), got {trim}")
    k_lo = max(1, int(np.ceil(n * trim)))
    k_hi = min(n - 1, int(np.floor(n * (1 - trim))))
    if k_lo > k_hi:
        raise ConfigError(f"empty candidate set for n={n}, trim={trim}")
    return k_lo, k_hi


def criterion_profile(values, trim):
    """Criterion over every admissible k, via prefix sums (O(n*p) total)."""
    X = np.asarray(values, dtype=float)
    n = X.shape[0]
    k_lo, k_hi = candidate_range(n, trim)
    ks = np.arange(k_lo, k_hi + 1)
    csum = np.cumsum(X, axis=0)
    total = csum[-1]
    total_sq = float((X ** 2).sum())
    left = csum[ks - 1]
    fitted = (left ** 2).sum(axis=1) / ks + ((total - left) ** 2).sum(axis=1) / (n - ks)
    return ks, (total_sq - fitted) / n


def detect_change_point(panel: PanelData, trim=DEFAULT_TRIM) -> ChangePointFit:
    """Least-squares break estimate over the trimmed candidate grid.

    Ties in the criterion resolve to the smallest index.
    """
    ks, profile = criterion_profile(panel.values, trim)
    k_hat = int(ks[np.argmin(profile)])
    mu1, mu2 = segment_means(panel, k_hat)
    return ChangePointFit(
        k_hat=k_hat,
        tau_hat=k_hat / panel.n,
        mu1_hat=mu1,
        mu2_hat=mu2,
        trim=trim,
        n=panel.n,
        profile_k=ks,
        profile_value=profile,
    )


def shift_invariance_check(panel: PanelData, trim=DEFAULT_TRIM) -> bool:
    """Verify the scan is invariant to location shifts and positive scaling.

    Adds a global constant, a per-series constant vector, and rescales by
    a positive factor; the break index must not move and the criterion
    must scale quadratically under scaling.
    """
    base = detect_change_point(panel, trim)
    shifted = PanelData(panel.values + 7.0)
    if detect_change_point(shifted, trim).k_hat != base.k_hat:
        return False
    per_series = PanelData(panel.values + np.arange(1, panel.p + 1)[None, :])
    if detect_change_point(per_series, trim).k_hat != base.k_hat:
        return False
    lam = 2.5
    scaled = detect_change_point(PanelData(panel.values * lam), trim)
    if scaled.k_hat != base.k_hat:
        return False
    return np.allclose(scaled.profile_value, lam ** 2 * base.profile_value, rtol=1e-9, atol=1e-12)
