"""
Fuzzing tests using Hypothesis for robustness testing.

Parsers must reject arbitrary input with their own format error, and the
relativity identities must hold across the admissible domain.
"""

import math
import struct

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from entlab.cli.main import main
from entlab.core.constants import (
    EXIT_VALIDATION_ERROR,
    KEY_HEADER_FORMAT,
    KEY_MAGIC,
    KEY_VERSION,
)
from entlab.core.errors import FeatureFileError, ImageFormatError, KeyFormatError
from entlab.core.relativity import (
    BoostParams,
    Event,
    check_interval_invariance,
    gamma,
    interval,
    inverse_boost,
    lorentz_boost,
)
from entlab.formats.keyfile import key_from_bytes, key_to_bytes, save_key
from entlab.formats.netpbm import parse_image
from entlab.formats.tables import import_features

pytestmark = pytest.mark.fuzzing

netpbm_bytes = st.one_of(
    st.binary(max_size=200),
    st.builds(
        lambda magic, body: magic + body,
        st.sampled_from([b"P1", b"P2", b"P4", b"P5"]),
        st.binary(max_size=200),
    ),
    st.builds(
        lambda magic, w, h, m, body: magic + f"\n{w} {h}\n{m}\n".encode() + body,
        st.sampled_from([b"P2", b"P5"]),
        st.integers(0, 6),
        st.integers(0, 6),
        st.integers(0, 70000),
        st.binary(max_size=100),
    ),
)

coordinate = st.floats(-10.0, 10.0, allow_nan=False)


@st.composite
def boosts(draw) -> BoostParams:
    v_limit = draw(st.floats(0.5, 2.0))
    beta = draw(st.floats(-0.9, 0.9))
    return BoostParams(v_limit=v_limit, v_boost=beta * v_limit)


class TestParserFuzzing:
    """Fuzzing tests for the file parsers."""

    @given(data=netpbm_bytes)
    @settings(max_examples=300)
    def test_netpbm_rejects_cleanly(self, data):
        """Test that any byte string parses or raises ImageFormatError."""
        try:
            message = parse_image(data)
        except ImageFormatError:
            return
        assert message.k == message.width * message.height

    @given(
        ell=st.integers(0, 4),
        n=st.integers(0, 8),
        k=st.integers(0, 4),
        t=st.integers(0, 3),
        seed=st.integers(0, (1 << 64) - 1),
        body=st.binary(max_size=64),
    )
    @settings(max_examples=300)
    def test_key_rejects_cleanly(self, ell, n, k, t, seed, body):
        """Test that any header and body parse or raise KeyFormatError."""
        header = struct.pack(
            KEY_HEADER_FORMAT, KEY_MAGIC, KEY_VERSION, 0, ell, n, k, t, seed
        )
        try:
            key = key_from_bytes(header + body)
        except KeyFormatError:
            return
        assert key_to_bytes(key) == header + body

    @given(data=st.binary(max_size=100))
    @settings(max_examples=200)
    def test_key_random_bytes(self, data):
        """Test that raw random bytes never escape as another error."""
        with pytest.raises(KeyFormatError):
            key_from_bytes(data)

    @given(
        text=st.text(
            alphabet=st.characters(blacklist_categories=("Cs",)), min_size=0, max_size=100
        )
    )
    @settings(
        max_examples=200, suppress_health_check=[HealthCheck.function_scoped_fixture]
    )
    def test_feature_csv_rejects_cleanly(self, tmp_path, text):
        """Test that any text parses or raises FeatureFileError."""
        path = tmp_path / "fuzz.csv"
        path.write_text(text, encoding="utf-8", newline="")
        try:
            vectors = import_features(path)
        except FeatureFileError:
            return
        assert len({v.size for v in vectors}) == 1

    @given(data=st.binary(max_size=120))
    @settings(
        max_examples=200, suppress_health_check=[HealthCheck.function_scoped_fixture]
    )
    def test_feature_csv_bytes_reject_cleanly(self, tmp_path, data):
        """Test that arbitrary bytes, invalid UTF-8 included, raise only FeatureFileError."""
        path = tmp_path / "fuzz.csv"
        path.write_bytes(data)
        try:
            vectors = import_features(path)
        except FeatureFileError:
            return
        assert len({v.size for v in vectors}) == 1

    @pytest.mark.usefixtures("restore_logging")
    @given(data=st.binary(max_size=120))
    @settings(
        max_examples=100, suppress_health_check=[HealthCheck.function_scoped_fixture]
    )
    def test_cipher_file_bytes_exit_cleanly(self, tmp_path, small_key, data):
        """Test that an arbitrary cipher file makes decode exit 2, never raise."""
        save_key(small_key, tmp_path / "key.bin")
        cipher = tmp_path / "cipher.json"
        cipher.write_bytes(data)
        code = main(
            [
                "--log-level",
                "error",
                "reconcile",
                "decode",
                "--mode",
                "bit",
                "--key",
                str(tmp_path / "key.bin"),
                "--cipher",
                str(cipher),
                "--image-out",
                str(tmp_path / "decoded.pbm"),
                "--metrics-out",
                str(tmp_path / "metrics.json"),
            ]
        )
        assert code == EXIT_VALIDATION_ERROR
        assert not (tmp_path / "metrics.json").exists()


class TestRelativityProperties:
    """Property tests for boosts and intervals."""

    @given(p=boosts(), s=coordinate, x=coordinate, y=coordinate)
    @settings(max_examples=500)
    def test_interval_invariance(self, p, s, x, y):
        """Test that boosting preserves the interval."""
        assert abs(check_interval_invariance(Event(s, x, y), p)) < 1e-9

    @given(
        p=boosts(),
        s=st.floats(-1e3, 1e3),
        x=st.floats(-1e3, 1e3),
        y=st.floats(-1e3, 1e3),
    )
    @settings(max_examples=500)
    def test_interval_invariance_large_coordinates(self, p, s, x, y):
        """Test that the residual scales with gamma^2 and the squared magnitudes."""
        magnitude = x * x + y * y + (p.v_limit * s) ** 2
        bound = 5e-14 * gamma(p) ** 2 * (1.0 + magnitude)
        assert check_interval_invariance(Event(s, x, y), p) <= bound

    @given(p=boosts(), s=coordinate, x=coordinate, y=coordinate)
    @settings(max_examples=500)
    def test_inverse_boost(self, p, s, x, y):
        """Test that boosting back recovers the event."""
        e = Event(s, x, y)
        back = lorentz_boost(lorentz_boost(e, p), inverse_boost(p))
        assert math.isclose(back.s, s, abs_tol=1e-12 * max(1.0, abs(s), abs(x)) * 10)
        assert math.isclose(back.x, x, abs_tol=1e-12 * max(1.0, abs(s), abs(x)) * 10)
        assert back.y == y

    @given(p=boosts(), x=coordinate)
    @settings(max_examples=200)
    def test_light_ray_stays_lightlike(self, p, x):
        """Test that x = v s stays on the light cone."""
        e = Event(x / p.v_limit, x)
        boosted = lorentz_boost(e, p)
        assert abs(interval(boosted, p.v_limit)) < 1e-9
