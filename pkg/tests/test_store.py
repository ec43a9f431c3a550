import json
import struct

import numpy as np
import pytest

from helpers import crc32c_reference, make_set
from noveval._crc32c import crc32c, crc32c_combine
from noveval.errors import (
    EmbeddingValidationError,
    FormatError,
    InvalidArgumentError,
    StoreIOError,
)
from noveval.store import (
    EmbeddingSet,
    read_embedding_set,
    sidecar_path,
    write_embedding_set,
)


class TestCrc32c:
    def test_check_vectors(self):
        assert crc32c(b"") == 0
        assert crc32c(b"123456789") == 0xE3069283
        assert crc32c(b"The quick brown fox jumps over the lazy dog") == 0x22620404

    def test_vectorized_matches_reference(self):
        rng = np.random.default_rng(1)
        for n in (1, 250, 32767, 32768, 40001, 1 << 17):
            data = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
            assert crc32c(data) == crc32c_reference(data), n

    def test_combine(self):
        a, b = b"abcdef", b"a much longer tail with more bytes in it" * 3
        assert crc32c_combine(crc32c(a), crc32c(b), len(b)) == crc32c(a + b)

    def test_bitflip_changes_crc(self):
        rng = np.random.default_rng(2)
        data = bytearray(rng.integers(0, 256, 5000, dtype=np.uint8).tobytes())
        before = crc32c(bytes(data))
        data[1234] ^= 0x40
        assert crc32c(bytes(data)) != before


class TestRoundTrip:
    def test_structural_identity(self, tmp_path):
        rng = np.random.default_rng(0)
        eset = make_set(
            rng.standard_normal((17, 9)),
            labels=[f"c{i % 3}" for i in range(17)],
            tags=["train" if i % 2 else "test" for i in range(17)],
            dataset_id="synthetic",
            algorithm="unit",
            split_file="s.json",
        )
        path = tmp_path / "e.nveb"
        write_embedding_set(eset, path)
        back = read_embedding_set(path)
        assert back.ids == eset.ids
        assert back.labels == eset.labels
        assert back.tags == eset.tags
        assert back.dataset_id == "synthetic"
        assert back.algorithm == "unit"
        assert np.array_equal(back.matrix, eset.matrix)

    def test_exact_f32_bits(self, tmp_path):
        eset = make_set([[1, 2], [3, 4], [5, 6]], labels=["a", "a", "b"])
        path = tmp_path / "e.nveb"
        write_embedding_set(eset, path)
        back = read_embedding_set(path)
        assert back.matrix.tobytes() == eset.matrix.tobytes()

    def test_empty_set(self, tmp_path):
        eset = EmbeddingSet(np.zeros((0, 8), dtype=np.float32), (), (), ())
        path = tmp_path / "empty.nveb"
        write_embedding_set(eset, path)
        back = read_embedding_set(path)
        assert back.n == 0 and back.d == 8

    def test_checksum_matches_second_tool(self, tmp_path):
        # spec-sized case: 1000x512; reference CRC built independently above
        rng = np.random.default_rng(42)
        eset = make_set(
            rng.standard_normal((1000, 512)), labels=["c"] * 1000
        )
        path = tmp_path / "big.nveb"
        reported = write_embedding_set(eset, path)
        raw = path.read_bytes()
        assert reported == f"{crc32c_reference(raw[:-4]):08x}"
        (stored,) = struct.unpack("<I", raw[-4:])
        assert f"{stored:08x}" == reported

    def test_equal_sets_equal_checksums(self, tmp_path):
        eset = make_set([[1.5, -2.5]], labels=["a"])
        c1 = write_embedding_set(eset, tmp_path / "a.nveb")
        c2 = write_embedding_set(eset, tmp_path / "b.nveb")
        assert c1 == c2


class TestWriteValidation:
    def test_nan_rejected_on_write(self, tmp_path):
        eset = make_set([[np.nan, 1.0]], labels=["a"])
        with pytest.raises(InvalidArgumentError):
            write_embedding_set(eset, tmp_path / "x.nveb")

    def test_duplicate_ids_rejected(self, tmp_path):
        eset = make_set([[1.0], [2.0]], labels=["a", "a"], ids=["s", "s"])
        with pytest.raises(InvalidArgumentError):
            write_embedding_set(eset, tmp_path / "x.nveb")

    def test_length_mismatch_rejected(self, tmp_path):
        eset = make_set([[1.0], [2.0]], labels=["a"], ids=["s0", "s1"])
        with pytest.raises(InvalidArgumentError):
            write_embedding_set(eset, tmp_path / "x.nveb")

    def test_bad_tag_rejected(self, tmp_path):
        eset = make_set([[1.0]], labels=["a"], tags=["validation"])
        with pytest.raises(InvalidArgumentError):
            write_embedding_set(eset, tmp_path / "x.nveb")

    def test_io_failure(self, tmp_path):
        eset = make_set([[1.0]], labels=["a"])
        with pytest.raises(StoreIOError):
            write_embedding_set(eset, tmp_path / "no" / "such" / "dir" / "x.nveb")


@pytest.fixture
def valid_file(tmp_path):
    rng = np.random.default_rng(3)
    eset = make_set(rng.standard_normal((12, 4)), labels=[f"c{i % 2}" for i in range(12)])
    path = tmp_path / "v.nveb"
    write_embedding_set(eset, path)
    return path


class TestReadValidation:
    def test_corrupted_magic(self, valid_file):
        raw = bytearray(valid_file.read_bytes())
        raw[:4] = b"JUNK"
        valid_file.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            read_embedding_set(valid_file)

    def test_bad_version(self, valid_file):
        raw = bytearray(valid_file.read_bytes())
        struct.pack_into("<I", raw, 4, 99)
        valid_file.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="version"):
            read_embedding_set(valid_file)

    def test_truncated_payload(self, valid_file):
        raw = valid_file.read_bytes()
        valid_file.write_bytes(raw[: len(raw) - 9])
        with pytest.raises(FormatError, match="truncated"):
            read_embedding_set(valid_file)

    def test_truncated_header(self, valid_file):
        valid_file.write_bytes(valid_file.read_bytes()[:7])
        with pytest.raises(FormatError, match="truncated"):
            read_embedding_set(valid_file)

    def test_payload_bitflip_fails_checksum(self, valid_file):
        raw = bytearray(valid_file.read_bytes())
        raw[20] ^= 0x01
        valid_file.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="checksum"):
            read_embedding_set(valid_file)

    def test_nan_row_cited(self, tmp_path):
        # bypass write-side validation: patch the payload, re-sign the CRC
        rng = np.random.default_rng(4)
        mat = rng.standard_normal((10, 4)).astype(np.float32)
        eset = make_set(mat, labels=["c"] * 10)
        path = tmp_path / "n.nveb"
        write_embedding_set(eset, path)
        raw = bytearray(path.read_bytes())
        offset = 16 + (7 * 4 + 2) * 4  # row 7, column 2
        struct.pack_into("<f", raw, offset, float("nan"))
        struct.pack_into("<I", raw, len(raw) - 4, crc32c(bytes(raw[:-4])))
        path.write_bytes(bytes(raw))
        with pytest.raises(EmbeddingValidationError, match="row 7"):
            read_embedding_set(path)

    def test_missing_sidecar(self, valid_file):
        sidecar_path(valid_file).unlink()
        with pytest.raises(FormatError, match="sidecar"):
            read_embedding_set(valid_file)

    def test_sidecar_length_mismatch(self, valid_file):
        meta_file = sidecar_path(valid_file)
        meta = json.loads(meta_file.read_text())
        meta["labels"] = meta["labels"][:-1]
        meta_file.write_text(json.dumps(meta))
        with pytest.raises(EmbeddingValidationError, match="labels"):
            read_embedding_set(valid_file)

    def test_trailing_garbage(self, valid_file):
        valid_file.write_bytes(valid_file.read_bytes() + b"xx")
        with pytest.raises(FormatError, match="trailing"):
            read_embedding_set(valid_file)
