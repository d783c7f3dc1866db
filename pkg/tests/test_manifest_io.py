"""Manifest parsing rules, model-file round trips, PGM round trips."""

import io

import numpy as np
import pytest

from stmatch.core import HyperParams
from stmatch.errors import ImageFormatError, ManifestError, ModelFormatError
from stmatch.manifest import parse_manifest, write_manifest
from stmatch.model import fit
from stmatch.model_io import MAGIC, load_model, save_model, serialize_model
from stmatch.pgm import load_image, read_pgm, write_pgm


def _parse(text):
    return parse_manifest(io.StringIO(text))


HEADER = "subject_id,modality,image_path\n"


class TestParseManifest:
    def test_single_mated_pair(self):
        m = _parse(HEADER + "s1,skull,a.pgm\ns1,face,b.pgm\n")
        pairs = m.mated_pairs()
        assert len(pairs) == 1
        assert pairs[0].subject_id == "s1"
        assert pairs[0].skull_path == "a.pgm"
        assert pairs[0].face_path == "b.pgm"
        assert m.distractors() == []

    def test_duplicate_skull_names_subject(self):
        with pytest.raises(ManifestError, match="s1"):
            _parse(HEADER + "s1,skull,a.pgm\ns1,skull,b.pgm\ns1,face,c.pgm\n")

    def test_missing_mate_rejected(self):
        with pytest.raises(ManifestError, match="missing mate"):
            _parse(HEADER + "s1,skull,a.pgm\n")
        with pytest.raises(ManifestError, match="missing mate"):
            _parse(HEADER + "s1,face,a.pgm\n")

    def test_thirty_five_pairs(self):
        rows = [HEADER]
        for i in range(35):
            rows.append(f"s{i:02d},skull,sk{i}.pgm\n")
            rows.append(f"s{i:02d},face,fa{i}.pgm\n")
        m = _parse("".join(rows))
        assert len(m.mated_pairs()) == 35
        assert len(m.distractors()) == 0
        assert len(m.subject_ids) == 35

    def test_distractor_only_manifest_is_valid(self):
        m = _parse(HEADER + "d1,distractor_face,x.pgm\nd2,distractor_face,y.pgm\n")
        assert len(m.mated_pairs()) == 0
        assert len(m.distractors()) == 2

    def test_distractor_collision_with_mated_subject_rejected(self):
        text = HEADER + "s1,skull,a.pgm\ns1,face,b.pgm\ns1,distractor_face,c.pgm\n"
        with pytest.raises(ManifestError, match="collide"):
            _parse(text)

    def test_duplicate_path_rejected(self):
        with pytest.raises(ManifestError, match="duplicate image path"):
            _parse(HEADER + "s1,skull,a.pgm\ns1,face,a.pgm\n")

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(ManifestError, match=":3:"):
            _parse(HEADER + "s1,skull,a.pgm\ns1,face\n")

    def test_unknown_modality_rejected(self):
        with pytest.raises(ManifestError, match="modality"):
            _parse(HEADER + "s1,profile,a.pgm\n")

    def test_bad_header_rejected(self):
        with pytest.raises(ManifestError, match="header"):
            _parse("id,mod,path\ns1,skull,a.pgm\n")

    def test_empty_file_rejected(self):
        with pytest.raises(ManifestError):
            _parse("")

    def test_header_only_manifest_is_empty_but_valid(self):
        m = _parse(HEADER)
        assert m.records == ()

    def test_write_then_parse_round_trip(self, tmp_path):
        m = _parse(HEADER + "s1,skull,a.pgm\ns1,face,b.pgm\nd9,distractor_face,c.pgm\n")
        path = tmp_path / "manifest.csv"
        write_manifest(m, path)
        again = parse_manifest(path)
        assert again.records == m.records


class TestModelFile:
    def _model(self, n=32, seed=0, tag="raw-8"):
        rng = np.random.default_rng(seed)
        xs, xd = rng.standard_normal((2, n, n * 2))
        model, _ = fit(xs, xd, HyperParams(tau=max(1, n // 2), max_iters=5),
                       feature_space_tag=tag)
        return model

    def test_round_trip_bit_exact(self, tmp_path):
        model = self._model()
        path = tmp_path / "model.stml"
        save_model(model, path)
        loaded = load_model(path)
        assert np.array_equal(loaded.transform, model.transform)
        assert loaded.hyper == model.hyper
        assert loaded.feature_space_tag == model.feature_space_tag
        assert loaded.feature_dim == model.feature_dim

    def test_serialized_parameter_count_is_n_squared(self):
        model = self._model(n=16)
        blob = serialize_model(model)
        # payload bytes between the fixed header and the checksum
        tag_len = len(model.feature_space_tag.encode())
        header = len(MAGIC) + 4 + 4 + tag_len + 4 + 24 + 8 + 8
        payload = len(blob) - header - 32
        assert payload == 16 * 16 * 8

    def test_every_corrupted_byte_is_caught(self, tmp_path):
        model = self._model(n=4)
        blob = bytearray(serialize_model(model))
        rng = np.random.default_rng(1)
        for _ in range(20):
            pos = int(rng.integers(0, len(blob)))
            corrupted = bytearray(blob)
            corrupted[pos] ^= 0xFF
            path = tmp_path / "corrupt.stml"
            path.write_bytes(bytes(corrupted))
            with pytest.raises(ModelFormatError):
                load_model(path)

    def test_truncation_rejected(self, tmp_path):
        model = self._model(n=4)
        blob = serialize_model(model)
        path = tmp_path / "short.stml"
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(ModelFormatError):
            load_model(path)

    def test_future_version_rejected(self, tmp_path):
        import hashlib
        import struct

        model = self._model(n=4)
        blob = bytearray(serialize_model(model)[:-32])
        blob[4:8] = struct.pack("<I", 99)
        blob += hashlib.sha256(bytes(blob)).digest()
        path = tmp_path / "future.stml"
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFormatError, match="version"):
            load_model(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.stml"
        path.write_bytes(b"JUNK" + b"\x00" * 64)
        with pytest.raises(ModelFormatError, match="magic"):
            load_model(path)


class TestPgm:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        img = rng.integers(0, 256, size=(13, 27), dtype=np.uint8)
        path = tmp_path / "img.pgm"
        write_pgm(path, img)
        assert np.array_equal(read_pgm(path), img)
        assert np.array_equal(load_image(path), img)

    def test_comments_in_header(self, tmp_path):
        path = tmp_path / "c.pgm"
        payload = bytes(range(6))
        path.write_bytes(b"P5\n# a comment\n3 2\n255\n" + payload)
        img = read_pgm(path)
        assert img.shape == (2, 3)
        assert img[0, 0] == 0 and img[1, 2] == 5

    def test_color_ppm_rejected(self, tmp_path):
        path = tmp_path / "color.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(ImageFormatError):
            read_pgm(path)

    def test_sixteen_bit_rejected(self, tmp_path):
        path = tmp_path / "deep.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(ImageFormatError, match="8-bit"):
            read_pgm(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "short.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(ImageFormatError, match="truncated"):
            read_pgm(path)

    def test_unknown_extension_rejected(self, tmp_path):
        path = tmp_path / "img.png"
        path.write_bytes(b"\x89PNG\r\n")
        with pytest.raises(ImageFormatError, match="unsupported"):
            load_image(path)
