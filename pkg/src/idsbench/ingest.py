"""Readers for the UNSW-NB15 and NSL-KDD distribution files.

Both datasets ship as plain comma-separated text. UNSW-NB15's published
train/test pair carries a header row; the NSL-KDD ``KDDTrain+.txt`` /
``KDDTest+.txt`` files and the raw UNSW-NB15 CSVs do not, so their header is
synthesized from the documented layouts below.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .data import FeatureSchema, make_schema
from .errors import ConfigError, DataError, MalformedRow, MissingFile, MissingLabel, UnknownAttackName

log = logging.getLogger(__name__)

UNSW_NB15 = "UNSW_NB15"
NSL_KDD = "NSL_KDD"
DATASET_IDS = (UNSW_NB15, NSL_KDD)

NSL_KDD_FEATURES = [
    ("duration", "integer"), ("protocol_type", "nominal"), ("service", "nominal"), ("flag", "nominal"),
    ("src_bytes", "integer"), ("dst_bytes", "integer"), ("land", "binary"), ("wrong_fragment", "integer"),
    ("urgent", "integer"), ("hot", "integer"), ("num_failed_logins", "integer"), ("logged_in", "binary"),
    ("num_compromised", "integer"), ("root_shell", "integer"), ("su_attempted", "integer"),
    ("num_root", "integer"), ("num_file_creations", "integer"), ("num_shells", "integer"),
    ("num_access_files", "integer"), ("num_outbound_cmds", "integer"), ("is_host_login", "binary"),
    ("is_guest_login", "binary"), ("count", "integer"), ("srv_count", "integer"), ("serror_rate", "real"),
    ("srv_serror_rate", "real"), ("rerror_rate", "real"), ("srv_rerror_rate", "real"),
    ("same_srv_rate", "real"), ("diff_srv_rate", "real"), ("srv_diff_host_rate", "real"),
    ("dst_host_count", "integer"), ("dst_host_srv_count", "integer"), ("dst_host_same_srv_rate", "real"),
    ("dst_host_diff_srv_rate", "real"), ("dst_host_same_src_port_rate", "real"),
    ("dst_host_srv_diff_host_rate", "real"), ("dst_host_serror_rate", "real"),
    ("dst_host_srv_serror_rate", "real"), ("dst_host_rerror_rate", "real"),
    ("dst_host_srv_rerror_rate", "real"),
]

# Published UNSW-NB15 training/testing CSVs (45 columns incl. id and both labels).
UNSW_PUBLISHED_COLUMNS = [
    ("id", "integer"), ("dur", "real"), ("proto", "nominal"), ("service", "nominal"), ("state", "nominal"),
    ("spkts", "integer"), ("dpkts", "integer"), ("sbytes", "integer"), ("dbytes", "integer"),
    ("rate", "real"), ("sttl", "integer"), ("dttl", "integer"), ("sload", "real"), ("dload", "real"),
    ("sloss", "integer"), ("dloss", "integer"), ("sinpkt", "real"), ("dinpkt", "real"), ("sjit", "real"),
    ("djit", "real"), ("swin", "integer"), ("stcpb", "integer"), ("dtcpb", "integer"), ("dwin", "integer"),
    ("tcprtt", "real"), ("synack", "real"), ("ackdat", "real"), ("smean", "integer"), ("dmean", "integer"),
    ("trans_depth", "integer"), ("response_body_len", "integer"), ("ct_srv_src", "integer"),
    ("ct_state_ttl", "integer"), ("ct_dst_ltm", "integer"), ("ct_src_dport_ltm", "integer"),
    ("ct_dst_sport_ltm", "integer"), ("ct_dst_src_ltm", "integer"), ("is_ftp_login", "binary"),
    ("ct_ftp_cmd", "integer"), ("ct_flw_http_mthd", "integer"), ("ct_src_ltm", "integer"),
    ("ct_srv_dst", "integer"), ("is_sm_ips_ports", "binary"), ("attack_cat", "nominal"), ("label", "binary"),
]

# Raw UNSW-NB15_{1..4}.csv files (49 columns, no header).
UNSW_RAW_COLUMNS = [
    ("srcip", "nominal"), ("sport", "integer"), ("dstip", "nominal"), ("dsport", "integer"),
    ("proto", "nominal"), ("state", "nominal"), ("dur", "real"), ("sbytes", "integer"), ("dbytes", "integer"),
    ("sttl", "integer"), ("dttl", "integer"), ("sloss", "integer"), ("dloss", "integer"),
    ("service", "nominal"), ("sload", "real"), ("dload", "real"), ("spkts", "integer"), ("dpkts", "integer"),
    ("swin", "integer"), ("dwin", "integer"), ("stcpb", "integer"), ("dtcpb", "integer"),
    ("smeansz", "integer"), ("dmeansz", "integer"), ("trans_depth", "integer"), ("res_bdy_len", "integer"),
    ("sjit", "real"), ("djit", "real"), ("stime", "timestamp"), ("ltime", "timestamp"), ("sintpkt", "real"),
    ("dintpkt", "real"), ("tcprtt", "real"), ("synack", "real"), ("ackdat", "real"),
    ("is_sm_ips_ports", "binary"), ("ct_state_ttl", "integer"), ("ct_flw_http_mthd", "integer"),
    ("is_ftp_login", "binary"), ("ct_ftp_cmd", "integer"), ("ct_srv_src", "integer"),
    ("ct_srv_dst", "integer"), ("ct_dst_ltm", "integer"), ("ct_src_ltm", "integer"),
    ("ct_src_dport_ltm", "integer"), ("ct_dst_sport_ltm", "integer"), ("ct_dst_src_ltm", "integer"),
    ("attack_cat", "nominal"), ("label", "binary"),
]

NSL_KDD_LAYOUTS = {
    43: NSL_KDD_FEATURES + [("label", "nominal"), ("difficulty", "integer")],
    42: NSL_KDD_FEATURES + [("label", "nominal")],
}
UNSW_LAYOUTS = {49: UNSW_RAW_COLUMNS, 45: UNSW_PUBLISHED_COLUMNS}

KNOWN_KINDS = {name: kind for name, kind in UNSW_RAW_COLUMNS + UNSW_PUBLISHED_COLUMNS + NSL_KDD_FEATURES}

UNSW_CLASSES = ("Normal", "Analysis", "Backdoor", "DoS", "Exploits", "Fuzzers", "Generic",
                "Reconnaissance", "Shellcode", "Worms")
NSL_KDD_CLASSES = ("Normal", "DoS", "Probe", "R2L", "U2R")

# Specific NSL-KDD / KDD'99 attack names folded into the four attack families.
NSL_KDD_FAMILIES = {
    "DoS": ("apache2", "back", "land", "mailbomb", "neptune", "pod", "processtable", "smurf",
            "teardrop", "udpstorm", "worm"),
    "Probe": ("ipsweep", "mscan", "nmap", "portsweep", "saint", "satan"),
    "R2L": ("ftp_write", "guess_passwd", "httptunnel", "imap", "multihop", "named", "phf", "sendmail",
            "snmpgetattack", "snmpguess", "spy", "warezclient", "warezmaster", "xlock", "xsnoop"),
    "U2R": ("buffer_overflow", "loadmodule", "perl", "ps", "rootkit", "sqlattack", "xterm"),
}
NSL_KDD_FOLD_MAP = {name: family for family, names in NSL_KDD_FAMILIES.items() for name in names}

_UNSW_ALIASES = {"backdoors": "Backdoor"}


@dataclass
class DatasetManifest:
    dataset_id: str
    file_paths: list[str]
    has_header: bool = True
    label_column: str = "label"
    attack_category_column: str | None = None
    drop_columns: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.dataset_id not in DATASET_IDS:
            raise ConfigError(f"dataset_id must be one of {DATASET_IDS}, got {self.dataset_id!r}")
        if isinstance(self.file_paths, (str, Path)):
            self.file_paths = [self.file_paths]
        self.file_paths = [str(p) for p in self.file_paths]
        if not self.file_paths:
            raise ConfigError("manifest needs at least one input file")
        self.label_column = self.label_column.strip().lower()
        if self.attack_category_column:
            self.attack_category_column = self.attack_category_column.strip().lower()
        self.drop_columns = [c.strip().lower() for c in self.drop_columns]

    @classmethod
    def for_dataset(cls, dataset_id: str, file_paths: Sequence[str | Path], **overrides) -> "DatasetManifest":
        """Manifest with the usual settings for the public files of ``dataset_id``."""
        if dataset_id == UNSW_NB15:
            kw = dict(has_header=True, label_column="label", attack_category_column="attack_cat",
                      drop_columns=["id"])
        elif dataset_id == NSL_KDD:
            kw = dict(has_header=False, label_column="label", attack_category_column=None,
                      drop_columns=["difficulty"])
        else:
            raise ConfigError(f"unknown dataset_id {dataset_id!r}")
        kw.update(overrides)
        return cls(dataset_id=dataset_id, file_paths=[str(p) for p in file_paths], **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(f"bad manifest: {e}") from None

    @classmethod
    def from_json(cls, path: str | Path) -> "DatasetManifest":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read manifest {path}: {e}") from None
        m = cls.from_dict(d)
        base = Path(path).parent
        m.file_paths = [str(p if Path(p).is_absolute() else base / p) for p in m.file_paths]
        return m

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RawTable:
    """String cells from all input files, concatenated in manifest order."""

    header: list[str]
    frame: pd.DataFrame
    source: np.ndarray
    paths: list[str]

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    @property
    def rows(self) -> list[list[str]]:
        return self.frame.values.tolist()


def _normalize_name(name: str) -> str:
    return name.strip().lower()


def _first_record(path: Path) -> tuple[int, list[str]] | None:
    with path.open("r", newline="", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                return lineno, next(csv.reader([line]))
    return None


def _check_arity(path: Path, expected: int, skip_first: bool):
    """Fail on the first record whose cell count differs from ``expected``."""
    with path.open("r", newline="", encoding="utf-8", errors="replace") as fh:
        seen_header = not skip_first
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if not seen_header:
                seen_header = True
                continue
            if line.count(",") + 1 != expected:
                got = len(next(csv.reader([line])))
                if got != expected:
                    raise MalformedRow(str(path), lineno, expected, got)


def _synth_header(dataset_id: str, width: int, path: Path) -> list[str]:
    layouts = NSL_KDD_LAYOUTS if dataset_id == NSL_KDD else UNSW_LAYOUTS
    if width not in layouts:
        expected = max(layouts)
        raise MalformedRow(str(path), 1, expected, width)
    return [name for name, _ in layouts[width]]


def load_raw(manifest: DatasetManifest) -> RawTable:
    """Read every file of ``manifest`` into one table of string cells."""
    paths = [Path(p) for p in manifest.file_paths]
    for p in paths:
        if not p.is_file():
            raise MissingFile(f"no such file: {p}")

    header: list[str] | None = None
    frames, sources = [], []
    for file_idx, path in enumerate(paths):
        first = _first_record(path)
        if first is None:
            continue
        _, cells = first
        if manifest.has_header:
            file_header = [_normalize_name(c) for c in cells]
        else:
            file_header = header or _synth_header(manifest.dataset_id, len(cells), path)
        if header is None:
            header = file_header
        elif file_header != header:
            raise DataError(f"{path}: header differs from {paths[0]}")
        _check_arity(path, len(header), skip_first=manifest.has_header)
        frame = pd.read_csv(path, header=None, skiprows=1 if manifest.has_header else 0, dtype=str,
                            keep_default_na=False, na_filter=False, skipinitialspace=False,
                            encoding_errors="replace")
        frame.columns = header
        frames.append(frame)
        sources.append(np.full(len(frame), file_idx, dtype=np.int64))
        log.info("read %d rows from %s", len(frame), path)

    if header is None:
        raise DataError("all input files are empty")
    frame = pd.concat(frames, ignore_index=True) if len(frames) > 1 else frames[0]
    return RawTable(header=header, frame=frame, source=np.concatenate(sources), paths=[str(p) for p in paths])


@dataclass
class LabeledTable:
    """Feature cells still as strings, labels already mapped."""

    schema: list[FeatureSchema]
    features: pd.DataFrame
    binary_labels: np.ndarray
    multiclass_labels: np.ndarray
    class_names: tuple[str, ...]
    source: np.ndarray
    dataset_id: str
    n_files: int

    @property
    def n_rows(self) -> int:
        return len(self.features)


def fold_nsl_attack(name: str) -> str:
    """Map an NSL-KDD label cell (``normal``, ``neptune`` ...) to its class name."""
    key = name.strip().lower().rstrip(".")
    if key == "normal":
        return "Normal"
    try:
        return NSL_KDD_FOLD_MAP[key]
    except KeyError:
        raise UnknownAttackName(f"NSL-KDD attack name {name!r} is not in the family map") from None


def normalize_unsw_category(cat: str) -> str:
    key = cat.strip().lower()
    if key in ("", "normal", "-"):
        return "Normal"
    if key in _UNSW_ALIASES:
        return _UNSW_ALIASES[key]
    for c in UNSW_CLASSES:
        if c.lower() == key:
            return c
    return cat.strip()


def _looks_numeric(col: pd.Series) -> bool:
    vals = col[(col != "") & (col != "-")]
    if vals.empty:
        return True
    parsed = pd.to_numeric(vals, errors="coerce")
    return not parsed.isna().any()


def _infer_schema(frame: pd.DataFrame) -> list[FeatureSchema]:
    cols = []
    for name in frame.columns:
        kind = KNOWN_KINDS.get(name)
        if kind is None:
            kind = "real" if _looks_numeric(frame[name]) else "nominal"
        cols.append((name, kind))
    return make_schema(cols)


def map_labels(raw: RawTable, manifest: DatasetManifest) -> LabeledTable:
    """Derive binary and multiclass labels and strip label/drop columns."""
    label_col = manifest.label_column
    if label_col not in raw.header:
        raise MissingLabel(f"label column {label_col!r} not found in {raw.header}")
    cat_col = manifest.attack_category_column
    if cat_col and cat_col not in raw.header:
        raise MissingLabel(f"attack category column {cat_col!r} not found")

    frame = raw.frame
    if manifest.dataset_id == NSL_KDD and not cat_col:
        names = frame[label_col].map(_cached(fold_nsl_attack))
        class_names = list(NSL_KDD_CLASSES)
        binary = (names != "Normal").to_numpy(np.int64)
    else:
        cats = frame[cat_col] if cat_col else frame[label_col]
        names = cats.map(_cached(normalize_unsw_category if manifest.dataset_id == UNSW_NB15 else str.strip))
        base = list(UNSW_CLASSES) if manifest.dataset_id == UNSW_NB15 else ["Normal"]
        extra = sorted(set(names.unique()) - set(base))
        if extra:
            log.warning("unexpected attack categories %s appended to class list", extra)
        class_names = base + extra
        if cat_col:
            lab = pd.to_numeric(frame[label_col].str.strip(), errors="coerce")
            if lab.isna().any():
                row = int(np.flatnonzero(lab.isna().to_numpy())[0])
                raise MissingLabel(f"row {row}: label cell {frame[label_col].iloc[row]!r} is not 0/1")
            binary = (lab.to_numpy() != 0).astype(np.int64)
            inconsistent = np.flatnonzero((binary == 0) != (names == "Normal").to_numpy())
            if len(inconsistent):
                r = int(inconsistent[0])
                raise DataError(f"row {r}: label {frame[label_col].iloc[r]!r} contradicts "
                                f"attack category {frame[cat_col].iloc[r]!r}")
        else:
            binary = (names != "Normal").to_numpy(np.int64)

    index = {n: i for i, n in enumerate(class_names)}
    multiclass = names.map(index).to_numpy(np.int64)

    dropped = {label_col, *(manifest.drop_columns or [])}
    if cat_col:
        dropped.add(cat_col)
    unknown_drops = set(manifest.drop_columns) - set(raw.header)
    if unknown_drops:
        log.warning("drop_columns not present in files: %s", sorted(unknown_drops))
    keep = [c for c in raw.header if c not in dropped]
    features = frame[keep]
    return LabeledTable(schema=_infer_schema(features), features=features, binary_labels=binary,
                        multiclass_labels=multiclass, class_names=tuple(class_names),
                        source=raw.source.copy(), dataset_id=manifest.dataset_id, n_files=len(raw.paths))


def _cached(fn):
    memo: dict[str, str] = {}

    def wrapped(v):
        try:
            return memo[v]
        except KeyError:
            memo[v] = out = fn(v)
            return out

    return wrapped


_HEX = re.compile(r"^0x[0-9a-f]+$", re.IGNORECASE)


def parse_numeric(col: pd.Series, name: str = "") -> np.ndarray:
    """Parse a numeric string column; blanks and '-' become 0, hex ports are decoded."""
    s = col.str.strip()
    out = pd.to_numeric(s, errors="coerce")
    bad = out.isna()
    if bad.any():
        fix = s[bad]
        blank = fix.isin(["", "-"])
        out[fix[blank].index] = 0.0
        hexed = fix[~blank & fix.str.match(_HEX)]
        if len(hexed):
            out[hexed.index] = hexed.map(lambda v: float(int(v, 16)))
        still = out.isna()
        if still.any():
            r = int(np.flatnonzero(still.to_numpy())[0])
            raise DataError(f"column {name!r} row {r}: cannot parse {col.iloc[r]!r} as a number")
        if blank.any():
            log.debug("column %s: %d blank cells read as 0", name, int(blank.sum()))
    arr = out.to_numpy(np.float64)
    if not np.isfinite(arr).all():
        r = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataError(f"column {name!r} row {r}: non-finite value {col.iloc[r]!r}")
    return arr


def load_dataset(manifest: DatasetManifest, unseen: str = "error"):
    """load_raw -> map_labels -> label encoding, returning ``(Dataset, EncodingMap)``."""
    from .preprocess import encode_table

    return encode_table(map_labels(load_raw(manifest), manifest), unseen=unseen)
