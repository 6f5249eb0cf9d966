"""Synthetic stand-ins for the public dataset files, laid out exactly like the originals."""
from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np
import pytest

from idsbench.ingest import NSL_KDD_FEATURES, UNSW_CLASSES, UNSW_PUBLISHED_COLUMNS

NSL_ATTACKS = {"DoS": ["neptune", "smurf", "back"], "Probe": ["satan", "ipsweep"], "R2L": ["guess_passwd"],
               "U2R": ["buffer_overflow"]}


def unsw_rows(n: int, seed: int, start_id: int = 1) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    names = [c for c, _ in UNSW_PUBLISHED_COLUMNS]
    attack = rng.random(n) < 0.55
    cats = np.where(attack, rng.choice(list(UNSW_CLASSES[1:]), size=n), "Normal")
    rows = []
    for i in range(n):
        a = bool(attack[i])
        cat_idx = UNSW_CLASSES.index(cats[i])
        row = {}
        for name, kind in UNSW_PUBLISHED_COLUMNS:
            if kind == "nominal":
                continue
            if kind == "binary":
                row[name] = str(int(rng.random() < 0.1))
            elif kind == "integer":
                row[name] = str(int(rng.integers(0, 50)))
            else:
                row[name] = f"{rng.exponential(1.0):.6f}"
        row["id"] = str(start_id + i)
        row["sttl"] = str(254 if (a and rng.random() < 0.9) else int(rng.choice([31, 62])))
        row["ct_state_ttl"] = str(int(a) * 2 if rng.random() < 0.8 else int(rng.integers(0, 3)))
        row["sbytes"] = str(int(rng.normal(200 + 120 * cat_idx, 40)) if a else int(rng.normal(900, 200)))
        row["smean"] = str(int(rng.normal(50 + 30 * cat_idx, 8)))
        row["proto"] = str(rng.choice(["tcp", "udp", "arp", "ospf"] if a else ["tcp", "udp"]))
        row["service"] = str(rng.choice(["-", "http", "dns", "ftp"]))
        row["state"] = str(rng.choice(["INT", "FIN", "CON"] if a else ["FIN", "CON"]))
        row["attack_cat"] = "" if cats[i] == "Normal" and rng.random() < 0.3 else str(cats[i])
        row["label"] = str(int(a))
        rows.append([row[c] for c in names])
    return rows


def write_unsw(path: Path, n: int, seed: int, start_id: int = 1) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([c for c, _ in UNSW_PUBLISHED_COLUMNS])
        w.writerows(unsw_rows(n, seed, start_id))
    return path


def nsl_rows(n: int, seed: int) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    fams = ["Normal", "DoS", "Probe", "R2L", "U2R"]
    rows = []
    for i in range(n):
        fam = fams[int(rng.choice(5, p=[0.5, 0.25, 0.12, 0.09, 0.04]))]
        label = "normal" if fam == "Normal" else str(rng.choice(NSL_ATTACKS[fam]))
        f = fams.index(fam)
        row = []
        for name, kind in NSL_KDD_FEATURES:
            if name == "protocol_type":
                row.append(str(rng.choice(["tcp", "udp", "icmp"])))
            elif name == "service":
                row.append(str(rng.choice(["http", "private", "ecr_i", "ftp_data"])))
            elif name == "flag":
                row.append("S0" if fam == "DoS" and rng.random() < 0.8 else str(rng.choice(["SF", "REJ"])))
            elif name == "same_srv_rate":
                row.append(f"{min(1.0, max(0.0, rng.normal([0.9, 0.1, 0.5, 0.7, 0.3][f], 0.05))):.2f}")
            elif name == "dst_host_srv_count":
                row.append(str(int(rng.normal([200, 20, 5, 60, 120][f], 5))))
            elif kind == "binary":
                row.append(str(int(rng.random() < 0.1)))
            elif kind == "real":
                row.append(f"{rng.random():.2f}")
            else:
                row.append(str(int(rng.integers(0, 20))))
        row += [label, str(int(rng.integers(10, 22)))]
        rows.append(row)
    return rows


def write_nsl(path: Path, n: int, seed: int) -> Path:
    with path.open("w", newline="") as fh:
        csv.writer(fh).writerows(nsl_rows(n, seed))
    return path


@pytest.fixture(scope="session")
def unsw_pair(tmp_path_factory) -> tuple[Path, Path]:
    d = tmp_path_factory.mktemp("unsw")
    return (write_unsw(d / "UNSW_NB15_training-set.csv", 400, 1),
            write_unsw(d / "UNSW_NB15_testing-set.csv", 200, 2, start_id=1))


@pytest.fixture(scope="session")
def nsl_pair(tmp_path_factory) -> tuple[Path, Path]:
    d = tmp_path_factory.mktemp("nsl")
    return write_nsl(d / "KDDTrain+.txt", 300, 3), write_nsl(d / "KDDTest+.txt", 150, 4)


@pytest.fixture(scope="session")
def unsw_dataset(unsw_pair):
    from idsbench.ingest import DatasetManifest, load_dataset

    return load_dataset(DatasetManifest.for_dataset("UNSW_NB15", unsw_pair))


@pytest.fixture(scope="session")
def nsl_dataset(nsl_pair):
    from idsbench.ingest import DatasetManifest, load_dataset

    return load_dataset(DatasetManifest.for_dataset("NSL_KDD", nsl_pair))


def pytest_report_header(config):
    data = os.environ.get("IDSBENCH_DATA")
    return f"IDSBENCH_DATA={data}" if data else "IDSBENCH_DATA not set: dataset-backed criteria will be skipped"


# one line per acceptance criterion, echoed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
