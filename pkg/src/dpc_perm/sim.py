"""Monte Carlo bit-error-rate sweeps over precoders and SNR grids.

Every trial owns a counter-based random stream derived from
``(seed, snr_index, trial_index)``, so error counts are identical for
any worker count and any chunking, and two sweeps that share a seed see
identical channels, bits, and noise regardless of the precoder under
test (which makes precoder comparisons paired).

Conventions, since the source figures never define them:

* SNR axis: noise variance per receive entry is
  ``(power_budget / n_users) / 10**(snr_db/10)`` with unit-energy
  constellations. A precoder delivering unit per-user effective gain at
  the power budget would trace the textbook QAM curve, so the axis reads
  as a nominal per-user symbol SNR shared by every method.
* Baseline transmit power: ZF, MMSE, and BD are scaled so
  ``tr(w w^H) = power_budget``; THP, being nonlinear, is scaled per
  channel from a deterministic pilot batch instead.
* The gain-controlled DPC family transmits its designed signal
  unrescaled: user n's effective gain is exactly the designed ``k[n]``
  (``diag(l)`` or the water-filled gains), which is what defines
  conventional dirty paper coding in the first place.
* Receiver: per-user gain compensation and a hard decision only (plus
  the lattice modulo for THP). All interference handling lives at the
  transmitter.
* Water-filled sweeps may mute users (zero gain); muted users transmit
  nothing and their bits are excluded from the error accounting.

Per-trial draw order from the trial stream: channel (per-trial mode
only), data bits, noise, then THP pilot symbols. The order is part of
the reproducibility contract.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from . import __version__ as _version
from .channel import sample_channel, stream
from .exceptions import ConfigError, DpcPermError, NumericallySingular
from .linalg import EPS_SING
from .modem import (
    Constellation,
    QAM_ORDERS,
    decision_margins,
    make_constellation,
    modulation_name,
    qam_demodulate,
    qam_modulate,
    wilson_interval,
)
from .precoding import bd_precode, thp_modulo_base, waterfill

__all__ = [
    "PRECODERS",
    "GAIN_MODES",
    "CHANNEL_MODES",
    "SweepConfig",
    "BerRecord",
    "noise_variance",
    "fixed_channel_for",
    "run_ber_sweep",
    "resolve_workers",
    "config_hash",
    "write_ber_csv",
    "write_manifest",
    "sweep_csv_name",
    "GRAY_LABELING_NOTE",
]

PRECODERS = ("dpc-conventional", "dpc-linear", "zf", "mmse", "thp", "bd")
GAIN_MODES = ("diag-L", "waterfill")
CHANNEL_MODES = ("fixed-channel", "per-trial-channel")

GRAY_LABELING_NOTE = (
    "square QAM: per-axis binary-reflected Gray, MSB half=real axis, label 0 at +max; "
    "128-qam: cross with serpentine Gray columns"
)

# Stream namespaces (first spawn_key element).
_NS_TRIAL = 0
_NS_FIXED_CHANNEL = 1

# Trials are processed in fixed-size chunks so that partial reductions are
# identical no matter how many workers run them.
_CHUNK = 512

# Pilot vectors per channel used to estimate THP transmit power.
_THP_PILOTS = 128

_DPC_FAMILY = ("dpc-conventional", "dpc-linear")


@dataclass
class SweepConfig:
    """Full description of one BER sweep (JSON-serializable)."""

    n_users: int
    snr_grid_db: tuple
    trials_per_point: int
    constellation_order: int = 4
    channel_mode: str = "per-trial-channel"
    precoder: str = "dpc-linear"
    gain_mode: str = "diag-L"
    power_budget: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.power_budget is None:
            self.power_budget = float(self.n_users)
        self.snr_grid_db = tuple(float(v) for v in self.snr_grid_db)

    def validate(self) -> "SweepConfig":
        checks = [
            (self.n_users >= 1, "n_users"),
            (self.trials_per_point >= 1, "trials_per_point"),
            (self.constellation_order in QAM_ORDERS, "constellation_order"),
            (self.channel_mode in CHANNEL_MODES, "channel_mode"),
            (self.precoder in PRECODERS, "precoder"),
            (self.gain_mode in GAIN_MODES, "gain_mode"),
            (self.power_budget > 0, "power_budget"),
            (self.seed >= 0, "seed"),
            (len(self.snr_grid_db) >= 1, "snr_grid_db"),
            (all(not math.isnan(v) for v in self.snr_grid_db), "snr_grid_db"),
            # +inf is the noiseless sentinel; -inf has no meaning here
            (all(v == math.inf or math.isfinite(v) for v in self.snr_grid_db), "snr_grid_db"),
        ]
        for ok, field_name in checks:
            if not ok:
                raise ConfigError(f"invalid value for field {field_name!r}")
        return self

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        if not isinstance(raw, dict):
            raise ConfigError("sweep config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = {"n_users", "snr_grid_db", "trials_per_point"} - set(raw)
        if missing:
            raise ConfigError(f"missing required config fields: {sorted(missing)}")
        data = dict(raw)
        if not isinstance(raw["snr_grid_db"], (list, tuple)):
            raise ConfigError("snr_grid_db must be a list")
        data["snr_grid_db"] = tuple(_parse_snr(v) for v in raw["snr_grid_db"])
        for field_name, kind in (
            ("n_users", int),
            ("trials_per_point", int),
            ("constellation_order", int),
            ("seed", int),
            ("power_budget", float),
        ):
            if field_name in data and data[field_name] is not None:
                try:
                    data[field_name] = kind(data[field_name])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid value for field {field_name!r}") from exc
        try:
            cfg = cls(**data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg.validate()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_grid_db"] = ["inf" if math.isinf(v) else v for v in self.snr_grid_db]
        return d


def _parse_snr(v) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity", "+inf"):
            return math.inf
        raise ConfigError(f"bad SNR value {v!r} in snr_grid_db")
    return float(v)


@dataclass
class BerRecord:
    """One SNR point of a sweep.

    ``measured_tx_power`` (mean transmit vector power) and
    ``min_decision_margin`` (distance of the closest received sample to a
    decision boundary) are diagnostics; the CSV schema carries only the
    spec'd columns.
    """

    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    ci_lo: float
    ci_hi: float
    measured_tx_power: float
    min_decision_margin: float


def noise_variance(cfg: SweepConfig, snr_db: float) -> float:
    """Per-entry complex noise variance for one SNR point (0 at inf SNR)."""
    if math.isinf(snr_db):
        return 0.0
    return (cfg.power_budget / cfg.n_users) / 10.0 ** (snr_db / 10.0)


def fixed_channel_for(cfg: SweepConfig) -> np.ndarray:
    """The channel used by every trial of a fixed-channel sweep."""
    return sample_channel(stream(cfg.seed, _NS_FIXED_CHANNEL), cfg.n_users)


def resolve_workers(workers: int | None) -> int:
    """Explicit worker count, else the DPC_PERM_WORKERS env var, else 1."""
    if workers is not None:
        if workers < 1:
            raise ConfigError("workers must be >= 1")
        return workers
    env = os.environ.get("DPC_PERM_WORKERS", "").strip()
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"DPC_PERM_WORKERS={env!r} is not an integer") from exc
        if value < 1:
            raise ConfigError("DPC_PERM_WORKERS must be >= 1")
        return value
    return 1


# ---------------------------------------------------------------------------
# Trial simulation
# ---------------------------------------------------------------------------


def _batched_lq(hs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stacked LQ with the real non-negative diagonal convention.

    Returns ``(l, q, dl)`` with ``hs[t] = l[t] @ q[t]`` and
    ``dl[t] = diag(l[t])`` real.
    """
    q_r, r = np.linalg.qr(hs.conj().transpose(0, 2, 1))
    d = np.diagonal(r, axis1=1, axis2=2)
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), 1.0)
    l = r.conj().transpose(0, 2, 1) * phase.conj()[:, np.newaxis, :]
    idx = np.arange(hs.shape[1])
    l[:, idx, idx] = mag
    q = phase[:, :, np.newaxis] * q_r.conj().transpose(0, 2, 1)
    scale = np.linalg.norm(hs, axis=(1, 2))
    if np.any(mag <= EPS_SING * scale[:, np.newaxis]):
        raise NumericallySingular("a trial channel is numerically singular for LQ-based DPC")
    return l, q, mag


def _gain_vectors(cfg: SweepConfig, hs: np.ndarray, dl: np.ndarray | None) -> np.ndarray:
    if cfg.gain_mode == "diag-L":
        if dl is None:
            _, _, dl = _batched_lq(hs)
        return dl
    sv = np.linalg.svd(hs, compute_uv=False)
    return np.vstack([waterfill(row, cfg.power_budget) for row in sv])


def _simulate_chunk(
    cfg: SweepConfig, snr_idx: int, snr_db: float, t0: int, t1: int, fixed_h: np.ndarray | None
) -> dict:
    """Simulate trials [t0, t1) of one SNR point and return partial sums."""
    n = cfg.n_users
    c = make_constellation(cfg.constellation_order)
    b = c.bits_per_symbol
    m = t1 - t0
    p_total = cfg.power_budget
    nv = noise_variance(cfg, snr_db)
    is_thp = cfg.precoder == "thp"

    bits = np.empty((m, n * b), dtype=np.uint8)
    noise = np.empty((m, n), dtype=np.complex128)
    if fixed_h is None:
        hs = np.empty((m, n, n), dtype=np.complex128)
    else:
        hs = np.broadcast_to(fixed_h, (m, n, n))
    pilots = np.empty((m, _THP_PILOTS, n), dtype=np.complex128) if is_thp else None

    for i, t in enumerate(range(t0, t1)):
        rng = stream(cfg.seed, _NS_TRIAL, snr_idx, t)
        if fixed_h is None:
            hs[i] = sample_channel(rng, n)
        bits[i] = rng.integers(0, 2, size=n * b, dtype=np.uint8)
        re = rng.standard_normal(n)
        im = rng.standard_normal(n)
        noise[i] = re + 1j * im
        if is_thp:
            labels = rng.integers(0, c.order, size=_THP_PILOTS * n)
            pilots[i] = c.points[labels].reshape(_THP_PILOTS, n)

    s = qam_modulate(bits.ravel(), c).reshape(m, n)

    if is_thp:
        x, g = _thp_transmit(cfg, hs, s, pilots, c)
    else:
        x, g = _linear_transmit(cfg, hs, s, nv)

    y = np.einsum("mij,mj->mi", hs, x)
    if nv > 0.0:
        y = y + math.sqrt(nv / 2.0) * noise

    active = g > 0
    y_hat = np.zeros_like(y)
    np.divide(y, g, out=y_hat, where=active)
    if is_thp:
        y_hat = _thp_wrap(y_hat, c)

    rx_symbols = y_hat[active]
    margins = decision_margins(rx_symbols, c)
    rx_bits = qam_demodulate(rx_symbols, c)
    tx_bits = bits.reshape(m, n, b)[active].ravel()
    errors = int(np.count_nonzero(tx_bits != rx_bits))

    return {
        "chunk": t0,
        "errors": errors,
        "bits": int(tx_bits.size),
        "tx_power_sum": float(np.sum(np.abs(x) ** 2)),
        "vectors": m,
        "min_margin": float(margins.min()) if margins.size else math.inf,
    }


def _linear_transmit(
    cfg: SweepConfig, hs: np.ndarray, s: np.ndarray, nv: float
) -> tuple[np.ndarray, np.ndarray]:
    """Precode one chunk with a linear method; returns (x, effective gains)."""
    n = cfg.n_users
    m = hs.shape[0]
    idx = np.arange(n)
    precoder = cfg.precoder

    if precoder in _DPC_FAMILY:
        # The gain-controlled family transmits its designed signal as is:
        # rescaling it to the power budget would change every user's
        # effective gain and with it the meaning of the per-user SNR axis.
        # The budget enters through the gain design (water-filling) and
        # through the noise calibration shared with the baselines.
        l = q = dl = None
        if precoder == "dpc-conventional" or cfg.gain_mode == "diag-L":
            l, q, dl = _batched_lq(hs)
        k = _gain_vectors(cfg, hs, dl)
        if precoder == "dpc-conventional":
            rhs = np.zeros((m, n, n), dtype=np.complex128)
            rhs[:, idx, idx] = k
            w = q.conj().transpose(0, 2, 1) @ np.linalg.solve(l, rhs)
        else:
            u, sv, vh = np.linalg.svd(hs)
            if np.any(sv[:, -1] <= EPS_SING * sv[:, 0]):
                raise NumericallySingular("a trial channel is singular for the SVD route")
            a = u.conj().transpose(0, 2, 1) * k[:, np.newaxis, :]
            a /= sv[:, :, np.newaxis]
            w = vh.conj().transpose(0, 2, 1) @ a
        x = np.einsum("mij,mj->mi", w, s)
        return x, k

    if precoder == "zf":
        w = np.linalg.inv(hs)
    elif precoder == "mmse":
        if nv > 0.0:
            gram = hs @ hs.conj().transpose(0, 2, 1) + (n * nv) * np.eye(n)
            w = hs.conj().transpose(0, 2, 1) @ np.linalg.inv(gram)
        else:
            w = np.linalg.inv(hs)
    elif precoder == "bd":
        # Single-antenna users: every user is its own block.
        groups = [[j] for j in range(n)]
        w = np.stack([bd_precode(hs[t], groups) for t in range(m)])
    else:
        raise ConfigError(f"unknown precoder {cfg.precoder!r}")

    alpha = _power_scale(w, cfg.power_budget)
    x = alpha[:, np.newaxis] * np.einsum("mij,mj->mi", w, s)
    hw_diag = np.real(np.einsum("mij,mji->mi", hs, w))
    return x, alpha[:, np.newaxis] * hw_diag


def _power_scale(w: np.ndarray, p_total: float) -> np.ndarray:
    tr = np.sum(np.abs(w) ** 2, axis=(1, 2))
    if np.any(tr <= 0):
        raise NumericallySingular("precoder collapsed to zero power")
    return np.sqrt(p_total / tr)


def _thp_transmit(
    cfg: SweepConfig, hs: np.ndarray, s: np.ndarray, pilots: np.ndarray, c: Constellation
) -> tuple[np.ndarray, np.ndarray]:
    """THP for one chunk; transmit power calibrated from the pilot batch."""
    l, q, dl = _batched_lq(hs)
    base = thp_modulo_base(c.points)
    xt = _thp_feedback(l, s[:, np.newaxis, :], base)[:, 0, :]
    xt_pilot = _thp_feedback(l, pilots, base)
    mean_power = np.mean(np.sum(np.abs(xt_pilot) ** 2, axis=2), axis=1)
    alpha = np.sqrt(cfg.power_budget / mean_power)
    x = alpha[:, np.newaxis] * np.einsum("mji,mj->mi", q.conj(), xt)
    return x, alpha[:, np.newaxis] * dl


def _thp_feedback(l: np.ndarray, s: np.ndarray, base: float) -> np.ndarray:
    """Vectorized successive modulo feedback; s has shape (m, draws, n)."""
    m, draws, n = s.shape
    xt = np.zeros((m, draws, n), dtype=np.complex128)
    span = 2.0 * base
    for i in range(n):
        acc = np.einsum("mj,mdj->md", l[:, i, :i], xt[:, :, :i])
        raw = s[:, :, i] - acc / l[:, i, i][:, np.newaxis]
        re = raw.real - span * np.floor((raw.real + base) / span)
        im = raw.imag - span * np.floor((raw.imag + base) / span)
        xt[:, :, i] = re + 1j * im
    return xt


def _thp_wrap(y_hat: np.ndarray, c: Constellation) -> np.ndarray:
    base = thp_modulo_base(c.points)
    span = 2.0 * base
    re = y_hat.real - span * np.floor((y_hat.real + base) / span)
    im = y_hat.imag - span * np.floor((y_hat.imag + base) / span)
    return re + 1j * im


# ---------------------------------------------------------------------------
# Sweep driver
# ---------------------------------------------------------------------------


def run_ber_sweep(cfg: SweepConfig, workers: int | None = None) -> list[BerRecord]:
    """Run the full SNR sweep described by ``cfg``.

    Results are a pure function of the config: per-trial streams make the
    error counts identical for any worker count. Precoder failures abort
    the sweep with the offending SNR point attached.
    """
    cfg.validate()
    n_workers = resolve_workers(workers)
    fixed_h = fixed_channel_for(cfg) if cfg.channel_mode == "fixed-channel" else None

    tasks = []
    for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
        for t0 in range(0, cfg.trials_per_point, _CHUNK):
            t1 = min(t0 + _CHUNK, cfg.trials_per_point)
            tasks.append((snr_idx, snr_db, t0, t1))

    partials: dict[int, list[dict]] = {i: [] for i in range(len(cfg.snr_grid_db))}
    try:
        if n_workers == 1:
            for snr_idx, snr_db, t0, t1 in tasks:
                partials[snr_idx].append(_simulate_chunk(cfg, snr_idx, snr_db, t0, t1, fixed_h))
        else:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                futures = [
                    (snr_idx, pool.submit(_simulate_chunk, cfg, snr_idx, snr_db, t0, t1, fixed_h))
                    for snr_idx, snr_db, t0, t1 in tasks
                ]
                for snr_idx, fut in futures:
                    partials[snr_idx].append(fut.result())
    except DpcPermError as exc:
        raise type(exc)(f"sweep aborted ({cfg.precoder}, seed {cfg.seed}): {exc}") from exc

    records = []
    for snr_idx, snr_db in enumerate(cfg.snr_grid_db):
        parts = sorted(partials[snr_idx], key=lambda d: d["chunk"])
        errors = sum(p["errors"] for p in parts)
        bits = sum(p["bits"] for p in parts)
        power_sum = sum(p["tx_power_sum"] for p in parts)
        vectors = sum(p["vectors"] for p in parts)
        margin = min(p["min_margin"] for p in parts)
        lo, hi = wilson_interval(errors, bits)
        records.append(
            BerRecord(
                snr_db=snr_db,
                bits_sent=bits,
                bit_errors=errors,
                ber=errors / bits,
                ci_lo=lo,
                ci_hi=hi,
                measured_tx_power=power_sum / vectors,
                min_decision_margin=margin,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------


def config_hash(cfg: SweepConfig) -> str:
    """Stable hash of the canonical JSON form of a config."""
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def sweep_csv_name(cfg: SweepConfig) -> str:
    return f"ber_{cfg.precoder}_{modulation_name(cfg.constellation_order)}.csv"


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return format(v, ".12g")


def write_ber_csv(records: Sequence[BerRecord], cfg: SweepConfig, path) -> None:
    """Write one sweep as CSV with a provenance comment header.

    The header carries the tool version, the config hash, the seed, and
    the bit-labeling convention, and no timestamps, so identical runs
    produce byte-identical files.
    """
    lines = [
        f"# dpc-perm {_version}",
        f"# config_hash={config_hash(cfg)}",
        f"# seed={cfg.seed}",
        f"# gray_labeling={GRAY_LABELING_NOTE}",
        "snr_db,bits,errors,ber,ci_lo,ci_hi,precoder,modulation,n_users,seed",
    ]
    name = modulation_name(cfg.constellation_order)
    for r in records:
        lines.append(
            ",".join(
                [
                    _fmt(r.snr_db),
                    str(r.bits_sent),
                    str(r.bit_errors),
                    _fmt(r.ber),
                    _fmt(r.ci_lo),
                    _fmt(r.ci_hi),
                    cfg.precoder,
                    name,
                    str(cfg.n_users),
                    str(cfg.seed),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_manifest(
    entries: Iterable[tuple[SweepConfig, Sequence[BerRecord]]], path
) -> None:
    """JSON summary mirroring each config plus its per-point records."""
    payload = {
        "schema_version": 1,
        "tool": "dpc-perm",
        "version": _version,
        "sweeps": [
            {
                "config": cfg.to_dict(),
                "config_hash": config_hash(cfg),
                "csv": sweep_csv_name(cfg),
                "records": [
                    {
                        "snr_db": "inf" if math.isinf(r.snr_db) else r.snr_db,
                        "bits": r.bits_sent,
                        "errors": r.bit_errors,
                        "ber": r.ber,
                        "ci_lo": r.ci_lo,
                        "ci_hi": r.ci_hi,
                        "measured_tx_power": r.measured_tx_power,
                    }
                    for r in records
                ],
            }
            for cfg, records in entries
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
