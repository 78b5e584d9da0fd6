"""Shared fixtures: the path-graph space, golden NIfTI bytes, dataset trees."""
from __future__ import annotations

import struct

import numpy as np
import pytest

from voxlab import (
    ClosureModel,
    PointSet,
    Relation,
    induced_space,
)

# Acceptance reporting: tests marked with @pytest.mark.criterion("...") get
# one PASS/FAIL line each in the terminal summary.

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion reported in the summary"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker:
        _ACCEPTANCE_RESULTS[marker.args[0]] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, result in _ACCEPTANCE_RESULTS.items():
            terminalreporter.write_line(f"ACCEPTANCE {result}: {name}")


@pytest.fixture
def path_relation() -> Relation:
    """Reflexive path graph 0 - 1 - 2: R(0)={0,1}, R(1)={0,1,2}, R(2)={1,2}."""
    return Relation.from_mapping(3, {0: [0, 1], 1: [0, 1, 2], 2: [1, 2]})


@pytest.fixture
def path_space(path_relation):
    return induced_space(path_relation)


@pytest.fixture
def path_model(path_space) -> ClosureModel:
    return ClosureModel(
        path_space,
        {
            "p": PointSet.from_indices(3, [2]),
            "q": PointSet.from_indices(3, [1]),
        },
    )


def golden_nifti_bytes() -> bytes:
    """A 2x2x2 U8 volume with values 0..7, authored field by field.

    Deliberately does not use the package writer: every byte is placed by
    hand at its documented offset so the reader is tested against an
    independent rendition of the format.
    """
    header = bytearray(348)
    header[0:4] = (348).to_bytes(4, "little")                  # sizeof_hdr
    header[40:42] = (3).to_bytes(2, "little")                  # dim[0]
    header[42:44] = (2).to_bytes(2, "little")                  # dim[1]
    header[44:46] = (2).to_bytes(2, "little")                  # dim[2]
    header[46:48] = (2).to_bytes(2, "little")                  # dim[3]
    for off in range(48, 56, 2):                               # dim[4..7] = 1
        header[off:off + 2] = (1).to_bytes(2, "little")
    header[70:72] = (2).to_bytes(2, "little")                  # datatype = uint8
    header[72:74] = (8).to_bytes(2, "little")                  # bitpix
    header[76:80] = struct.pack("<f", 1.0)                     # pixdim[0]
    header[80:84] = struct.pack("<f", 1.0)                     # pixdim[1]
    header[84:88] = struct.pack("<f", 1.0)                     # pixdim[2]
    header[88:92] = struct.pack("<f", 1.0)                     # pixdim[3]
    header[108:112] = struct.pack("<f", 352.0)                 # vox_offset
    header[344:348] = b"n+1\x00"                               # magic
    return bytes(header) + b"\x00\x00\x00\x00" + bytes(range(8))


@pytest.fixture
def golden_nifti() -> bytes:
    return golden_nifti_bytes()


def make_dataset_tree(root, volumes: dict[str, dict[str, bytes]]) -> None:
    """Build <root>/<dataset>/<case>/<layer file> from nested dicts of bytes."""
    for dataset, cases in volumes.items():
        for case, layers in cases.items():
            case_dir = root / dataset / case
            case_dir.mkdir(parents=True, exist_ok=True)
            for filename, payload in layers.items():
                (case_dir / filename).write_bytes(payload)


@pytest.fixture
def fixture_store(tmp_path):
    """A store over a small dataset tree with the golden volume as layer t1."""
    from voxlab.store import Store, StoreConfig

    datasets = tmp_path / "datasets"
    scripts = tmp_path / "scripts"
    workspaces = tmp_path / "workspaces"
    make_dataset_tree(datasets, {
        "BraTS2019": {
            "patient_001": {
                "t1.nii.gz": _gz(golden_nifti_bytes()),
                "seg.nii.gz": _gz(golden_nifti_bytes()),
                "notes.txt": b"not a layer",
            },
            "patient_002": {
                "t1.nii": golden_nifti_bytes(),
            },
        },
    })
    scripts.mkdir(parents=True)
    (scripts / "threshold.imgql").write_text('save "bright" t1 > 3\n', encoding="utf-8")
    (scripts / "self_dice.imgql").write_text('print "d" dice(t1 > 3, t1 > 3)\n', encoding="utf-8")
    workspaces.mkdir(parents=True)
    return Store(StoreConfig(
        dataset_root=datasets,
        scripts_root=scripts,
        workspaces_root=workspaces,
    ))


def _gz(data: bytes) -> bytes:
    import gzip

    return gzip.compress(data, mtime=0)
