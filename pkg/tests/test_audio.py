import numpy as np
import pytest
from scipy.io import wavfile

from rhythmeter.audio import AudioClip, load_wav, mix, n_segments, resample, segment, wav_duration, write_wav
from rhythmeter.errors import (
    CorruptHeader,
    EmptyInput,
    InvalidLength,
    InvalidRate,
    LengthMismatch,
    MissingFile,
    RateMismatch,
)


def test_pcm16_silence(tmp_path):
    p = tmp_path / "s.wav"
    wavfile.write(p, 44100, np.zeros(44100, dtype=np.int16))
    clip = load_wav(p)
    assert clip.sample_rate == 44100
    assert len(clip) == 44100
    assert np.all(clip.samples == 0.0)
    assert clip.label == "s"


def test_stereo_mean_downmix_cancels(tmp_path):
    p = tmp_path / "st.wav"
    data = np.tile(np.array([[0.5, -0.5]], dtype=np.float32), (1000, 1))
    wavfile.write(p, 16000, data)
    assert np.all(load_wav(p).samples == 0.0)


def test_pcm16_full_scale_square(tmp_path):
    p = tmp_path / "sq.wav"
    sq = np.where(np.arange(800) % 80 < 40, 32767, -32767).astype(np.int16)
    wavfile.write(p, 8000, sq)
    x = load_wav(p).samples
    assert set(np.unique(x)) == {-32767 / 32768, 32767 / 32768}


@pytest.mark.parametrize(
    "dtype,value,expected",
    [(np.int32, 2**30, 0.5), (np.uint8, 192, 0.5), (np.uint8, 128, 0.0), (np.float32, -0.25, -0.25)],
)
def test_pcm_scaling(tmp_path, dtype, value, expected):
    p = tmp_path / "x.wav"
    wavfile.write(p, 8000, np.full(16, value, dtype=dtype))
    assert np.all(load_wav(p).samples == expected)


def test_missing_and_corrupt(tmp_path):
    with pytest.raises(MissingFile):
        load_wav(tmp_path / "nope.wav")
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"not a wave file at all")
    with pytest.raises(CorruptHeader):
        load_wav(bad)
    truncated = tmp_path / "trunc.wav"
    wavfile.write(truncated, 8000, np.zeros(100, dtype=np.int16))
    truncated.write_bytes(truncated.read_bytes()[:30])
    with pytest.raises(CorruptHeader):
        load_wav(truncated)


def test_write_then_read_roundtrip(tmp_path):
    clip = AudioClip(np.linspace(-1, 1, 257), 22050, "piano")
    write_wav(tmp_path / "piano.wav", clip)
    back = load_wav(tmp_path / "piano.wav")
    assert back.sample_rate == 22050
    np.testing.assert_allclose(back.samples, clip.samples, atol=1e-7)
    assert wav_duration(tmp_path / "piano.wav") == pytest.approx(257 / 22050)


def test_resample_identity_and_length():
    x = AudioClip(np.random.default_rng(0).normal(size=1600), 16000)
    assert resample(x, 16000) == x
    y = resample(AudioClip(np.zeros(48000), 48000), 16000)
    assert (len(y), y.sample_rate) == (16000, 16000)


def test_resample_sine_matches_analytic():
    t48 = np.arange(48000) / 48000
    y = resample(AudioClip(np.sin(2 * np.pi * 100 * t48), 48000), 16000).samples
    ref = np.sin(2 * np.pi * 100 * np.arange(16000) / 16000)
    interior = slice(500, -500)
    assert np.corrcoef(y[interior], ref[interior])[0, 1] >= 0.999


def test_resample_bad_rate():
    with pytest.raises(InvalidRate):
        resample(AudioClip(np.zeros(10), 16000), 0)
    with pytest.raises(InvalidRate):
        AudioClip(np.zeros(10), -5)


def test_segment_examples():
    sr = 1000
    thirty = AudioClip(np.arange(30 * sr, dtype=float), sr)
    segs = segment(thirty, 10.24)
    assert len(segs) == 2
    exact = AudioClip(np.arange(10240, dtype=float), sr)
    (only,) = segment(exact, 10.24)
    assert np.array_equal(only.samples, exact.samples)
    assert segment(AudioClip(np.zeros(5 * sr), sr), 10.0) == []
    with pytest.raises(InvalidLength):
        segment(thirty, 0)
    assert n_segments(30.0, 10.24) == 2


def test_segment_concat_is_prefix():
    x = AudioClip(np.random.default_rng(1).normal(size=16000 * 25), 16000)
    segs = segment(x, 10.24)
    joined = np.concatenate([s.samples for s in segs])
    assert np.array_equal(joined, x.samples[: len(joined)])
    assert len(joined) == 2 * 163840


def test_mix_examples():
    sr = 8000
    silence = AudioClip(np.zeros(100), sr)
    assert np.all(mix([silence, silence]).samples == 0.0)
    x = AudioClip(np.random.default_rng(2).normal(size=100), sr)
    assert np.all(mix([x, AudioClip(-x.samples, sr)]).samples == 0.0)
    stems = [AudioClip(np.full(100, 0.3), sr) for _ in range(4)]
    np.testing.assert_allclose(mix(stems).samples, 1.2, rtol=0, atol=1e-15)
    assert mix(stems).samples.max() > 1.0  # no clipping


def test_mix_commutative_on_dyadic_values():
    rng = np.random.default_rng(3)
    clips = [AudioClip(rng.integers(-64, 64, size=50) / 64.0, 100) for _ in range(4)]
    a = mix(clips).samples
    assert np.array_equal(a, mix(clips[::-1]).samples)
    assert np.array_equal(a, mix([mix(clips[:2]), mix(clips[2:])]).samples)


def test_mix_errors():
    with pytest.raises(EmptyInput):
        mix([])
    with pytest.raises(RateMismatch):
        mix([AudioClip(np.zeros(4), 8000), AudioClip(np.zeros(4), 16000)])
    with pytest.raises(LengthMismatch):
        mix([AudioClip(np.zeros(4), 8000), AudioClip(np.zeros(5), 8000)])
