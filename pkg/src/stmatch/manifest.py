"""Dataset manifests: CSV listings of (subject, modality, image path).

A mated pair is a subject with exactly one ``skull`` and one ``face``
record.  Gallery-only identities use the ``distractor_face`` modality and
must not collide with mated subjects.  Parsing is strict: structural
problems are reported with their line number before any image is touched.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

from .errors import ManifestError

MODALITIES = ("skull", "face", "distractor_face")
HEADER = ("subject_id", "modality", "image_path")
FORMAT_VERSION = "1"


@dataclass(frozen=True)
class ManifestRecord:
    subject_id: str
    modality: str
    image_path: str


@dataclass(frozen=True)
class MatedPair:
    subject_id: str
    skull_path: str
    face_path: str


@dataclass(frozen=True)
class DatasetManifest:
    records: tuple[ManifestRecord, ...]
    format_version: str = FORMAT_VERSION

    def mated_pairs(self) -> list[MatedPair]:
        skulls: dict[str, str] = {}
        faces: dict[str, str] = {}
        order: list[str] = []
        for rec in self.records:
            if rec.modality == "skull":
                if rec.subject_id not in skulls and rec.subject_id not in faces:
                    order.append(rec.subject_id)
                skulls[rec.subject_id] = rec.image_path
            elif rec.modality == "face":
                if rec.subject_id not in skulls and rec.subject_id not in faces:
                    order.append(rec.subject_id)
                faces[rec.subject_id] = rec.image_path
        return [MatedPair(sid, skulls[sid], faces[sid]) for sid in order]

    def distractors(self) -> list[tuple[str, str]]:
        return [(r.subject_id, r.image_path) for r in self.records
                if r.modality == "distractor_face"]

    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(p.subject_id for p in self.mated_pairs())


def _validate(records: list[ManifestRecord]) -> None:
    paths: dict[str, str] = {}
    skulls: dict[str, int] = {}
    faces: dict[str, int] = {}
    distractor_ids = set()
    for rec in records:
        if rec.image_path in paths:
            raise ManifestError(
                f"duplicate image path {rec.image_path!r} "
                f"(first used by subject {paths[rec.image_path]!r})"
            )
        paths[rec.image_path] = rec.subject_id
        if rec.modality == "skull":
            skulls[rec.subject_id] = skulls.get(rec.subject_id, 0) + 1
        elif rec.modality == "face":
            faces[rec.subject_id] = faces.get(rec.subject_id, 0) + 1
        else:
            distractor_ids.add(rec.subject_id)
    for sid, count in skulls.items():
        if count > 1:
            raise ManifestError(f"subject {sid!r} has {count} skull records")
    for sid, count in faces.items():
        if count > 1:
            raise ManifestError(f"subject {sid!r} has {count} face records")
    mated_ids = set(skulls) | set(faces)
    for sid in sorted(mated_ids):
        if sid not in skulls:
            raise ManifestError(f"subject {sid!r} has a face record but no skull (missing mate)")
        if sid not in faces:
            raise ManifestError(f"subject {sid!r} has a skull record but no face (missing mate)")
    overlap = distractor_ids & mated_ids
    if overlap:
        raise ManifestError(
            f"distractor subject_ids collide with mated subjects: {sorted(overlap)}"
        )


def parse_manifest(source) -> DatasetManifest:
    """Parse and validate a manifest from a path or a text stream."""
    if hasattr(source, "read"):
        return _parse_stream(source, name=getattr(source, "name", "<stream>"))
    with open(source, "r", encoding="utf-8", newline="") as fh:
        return _parse_stream(fh, name=str(source))


def _parse_stream(stream, name: str) -> DatasetManifest:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError(f"{name}: empty manifest (missing header)") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ManifestError(
            f"{name}: header must be {','.join(HEADER)!r}, got {','.join(header)!r}"
        )
    records = []
    for row in reader:
        line = reader.line_num
        if len(row) == 0:
            continue
        if len(row) != 3:
            raise ManifestError(f"{name}:{line}: expected 3 fields, got {len(row)}")
        subject_id, modality, image_path = (f.strip() for f in row)
        if not subject_id or not image_path:
            raise ManifestError(f"{name}:{line}: empty subject_id or image_path")
        if modality not in MODALITIES:
            raise ManifestError(
                f"{name}:{line}: unknown modality {modality!r} (expected one of {MODALITIES})"
            )
        records.append(ManifestRecord(subject_id, modality, image_path))
    _validate(records)
    return DatasetManifest(records=tuple(records))


def write_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for rec in manifest.records:
            writer.writerow([rec.subject_id, rec.modality, rec.image_path])


def resolve_paths(manifest: DatasetManifest, base_dir) -> DatasetManifest:
    """Interpret relative image paths relative to the manifest's directory."""
    resolved = []
    for rec in manifest.records:
        path = rec.image_path
        if not os.path.isabs(path):
            path = os.path.normpath(os.path.join(base_dir, path))
        resolved.append(ManifestRecord(rec.subject_id, rec.modality, path))
    return DatasetManifest(records=tuple(resolved), format_version=manifest.format_version)
