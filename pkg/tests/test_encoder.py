"""Width classification, frame selection, packing, and channel encoding."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import pending, queue_of
from ecgz import bitio, encoder
from ecgz.encoder import (
    ESC,
    FRAME_A,
    FRAME_B,
    FRAME_C,
    FRAME_D,
    FRAME_E,
    FRAME_TYPES,
    PRIORITY,
    EncoderConfig,
)


# ---------------------------------------------------------------------------
# Width classes


def oracle_width(e: int) -> int:
    """Ascending scan of the two's-complement ranges, the slow way."""
    for c in encoder.WIDTH_CLASSES:
        if -(1 << (c - 1)) <= e <= (1 << (c - 1)) - 1:
            return c
    return ESC


def test_width_class_frozen_examples():
    assert encoder.min_width_class(0) == 2
    assert encoder.min_width_class(1) == 2
    assert encoder.min_width_class(-2) == 2
    assert encoder.min_width_class(2) == 3
    assert encoder.min_width_class(-3) == 3
    assert encoder.min_width_class(15) == 5
    assert encoder.min_width_class(-16) == 5
    assert encoder.min_width_class(16) == 7
    assert encoder.min_width_class(-64) == 7
    assert encoder.min_width_class(64) == ESC
    assert encoder.min_width_class(-8190) == ESC


@given(st.integers(min_value=-8192, max_value=8191))
def test_width_class_matches_range_oracle(e):
    assert encoder.min_width_class(e) == oracle_width(e)


@given(st.lists(st.integers(min_value=-8192, max_value=8191), max_size=100))
def test_vectorized_width_classes_match_scalar(errors):
    got = encoder.width_classes(np.array(errors, dtype=np.int64))
    assert got.tolist() == [encoder.min_width_class(e) for e in errors]


# ---------------------------------------------------------------------------
# Frame table structure


def test_every_frame_type_fills_exactly_sixteen_bits():
    for ft in FRAME_TYPES.values():
        assert ft.header_len + ft.field_width * ft.field_count == 16


def test_headers_are_prefix_free():
    headers = {ft.tag: format(ft.header_bits, f"0{ft.header_len}b") for ft in FRAME_TYPES.values()}
    headers["reserved"] = format(encoder.RESERVED_HEADER_BITS, "04b")
    items = list(headers.values())
    for i, a in enumerate(items):
        for j, b in enumerate(items):
            if i != j:
                assert not b.startswith(a), (a, b)


def test_priority_runs_densest_first():
    assert [ft.tag for ft in PRIORITY] == ["D", "C", "A", "B", "E"]


# ---------------------------------------------------------------------------
# Frame enable and selection


def test_frame_enable_examples():
    assert encoder.frame_enable(queue_of([0, 0, 0, 0, 0, 0])) == {"D", "C", "A", "B", "E"}
    assert encoder.frame_enable(queue_of([2, 2, 2, 2, 7, 7])) == {"C", "A", "B", "E"}
    assert encoder.frame_enable(queue_of([4, 4, 4, 2, 2, 2])) == {"A", "B", "E"}
    assert encoder.frame_enable(queue_of([100, 0, 0, 0, 0, 0])) == {"E"}
    assert encoder.frame_enable(queue_of([0, 100])) == {"E"}
    # short queues cannot enable the wider-count types
    assert encoder.frame_enable(queue_of([0, 0, 0, 0])) == {"C", "A", "B", "E"}
    assert encoder.frame_enable(queue_of([0])) == {"E"}
    with pytest.raises(ValueError):
        encoder.frame_enable([])


def oracle_select(widths):
    """First priority type whose field count and width the queue satisfies."""
    for ft in PRIORITY:
        if len(widths) >= ft.field_count and all(w <= ft.field_width for w in widths[: ft.field_count]):
            return ft.tag
    raise AssertionError


@given(st.lists(st.sampled_from([2, 3, 5, 7, ESC]), min_size=1, max_size=6))
def test_select_frame_matches_priority_oracle(widths):
    errors = {2: 1, 3: 2, 5: 4, 7: 16, ESC: 64}
    q = queue_of([errors[w] for w in widths])
    assert encoder.select_frame(q).tag == oracle_select(widths)


def test_pending_resync_forces_type_e():
    q = queue_of([0, 0, 0, 0, 0, 0], originals=[9, 8, 7, 6, 5, 4])
    assert encoder.select_frame(q).tag == "D"
    assert encoder.select_frame(q, resync_pending=1).tag == "E"
    assert encoder.select_frame(q, resync_pending=2).tag == "E"


# ---------------------------------------------------------------------------
# Packing


def bit_assembled(ftype, payload) -> int:
    """Independent packer: header then fields through the bit buffer."""
    buf = bitio.BitBuffer()
    buf.write_bits(ftype.header_bits, ftype.header_len)
    if ftype.carries_original:
        buf.write_bits(bitio.truncate_bits(payload[0].original, ftype.field_width), ftype.field_width)
    else:
        for p in payload:
            buf.write_bits(bitio.truncate_bits(p.error, ftype.field_width), ftype.field_width)
    cur = bitio.BitCursor(buf)
    return cur.read_bits(16)


def test_pack_frame_frozen_words():
    assert encoder.pack_frame(FRAME_D, queue_of([1, 0, -1, 1, 0, -2])) == 0x04D2
    assert encoder.pack_frame(FRAME_E, [pending(0, original=100)]) == 0x3064
    assert encoder.pack_frame(FRAME_A, queue_of([5, -3, 12])) == 0x97AC
    assert encoder.pack_frame(FRAME_B, queue_of([-1, 0])) == 0x7F80
    assert encoder.pack_frame(FRAME_C, queue_of([3, -4, 0, -1])) == 0x1707
    assert encoder.pack_frame(FRAME_E, [pending(0, original=-2048)]) == 0x3800


def test_pack_frame_validates_payload_length():
    with pytest.raises(ValueError):
        encoder.pack_frame(FRAME_D, queue_of([0] * 5))
    with pytest.raises(ValueError):
        encoder.pack_frame(FRAME_E, queue_of([0, 0]))


def test_pack_frame_rejects_field_overflow():
    bad = [encoder.PendingSample(0, 2, 2)] + queue_of([0] * 5)
    with pytest.raises(AssertionError):
        encoder.pack_frame(FRAME_D, bad)


def residual_payload(ftype):
    half = 1 << (ftype.field_width - 1)
    return st.lists(
        st.integers(min_value=-half, max_value=half - 1),
        min_size=ftype.field_count,
        max_size=ftype.field_count,
    ).map(queue_of)


@given(
    st.sampled_from(["A", "B", "C", "D"]).flatmap(
        lambda tag: st.tuples(st.just(tag), residual_payload(FRAME_TYPES[tag]))
    )
)
def test_pack_frame_matches_bit_assembly(case):
    tag, payload = case
    ftype = FRAME_TYPES[tag]
    assert encoder.pack_frame(ftype, payload) == bit_assembled(ftype, payload)


@given(st.integers(min_value=-2048, max_value=2047))
def test_pack_type_e_matches_bit_assembly(x):
    payload = [pending(0, original=x)]
    assert encoder.pack_frame(FRAME_E, payload) == bit_assembled(FRAME_E, payload)


# ---------------------------------------------------------------------------
# Whole-channel encoding


def test_constant_zero_signal_packs_six_per_frame():
    cfg = EncoderConfig(resync_interval_samples=0)
    assert encoder.encode_channel([0] * 12, cfg) == [0x0000, 0x0000]


def test_constant_nonzero_signal_warms_up_through_type_e():
    cfg = EncoderConfig(resync_interval_samples=0)
    words = encoder.encode_channel([100] * 20, cfg)
    # residuals are 100, -100, then zeros: two escapes, then 3 x 6 zeros
    assert words == [0x3064, 0x3064, 0x0000, 0x0000, 0x0000]


def test_flush_single_leftover_goes_out_as_type_e():
    cfg = EncoderConfig(resync_interval_samples=0)
    assert encoder.encode_channel([0], cfg) == [0x3000]


def test_flush_five_narrow_leftovers_use_c_then_e():
    cfg = EncoderConfig(resync_interval_samples=0)
    assert encoder.encode_channel([0] * 5, cfg) == [0x1000, 0x3000]


def test_flush_respects_field_counts_not_priority_order():
    # four width-2 leftovers: D needs six, so C wins
    cfg = EncoderConfig(resync_interval_samples=0)
    assert encoder.encode_channel([0] * 4, cfg) == [0x1000]


def test_empty_input_yields_no_frames():
    assert encoder.encode_channel([], EncoderConfig()) == []


def frame_tags(words):
    out = []
    for w in words:
        if w & 0x8000:
            out.append("A")
        elif w & 0x4000:
            out.append("B")
        else:
            out.append({0b0000: "D", 0b0001: "C", 0b0011: "E"}[w >> 12])
    return out


def test_resync_interval_forces_adjacent_raw_pairs():
    # steps of +-1 keep every residual narrow, so only forced escapes emit E
    rng = np.random.default_rng(5)
    x = np.cumsum(rng.integers(-1, 2, size=4 * 64 + 30)).astype(np.int64)
    cfg = EncoderConfig(resync_interval_samples=64)
    words = encoder.encode_channel(x, cfg)
    tags = frame_tags(words)
    e_at = [i for i, t in enumerate(tags) if t == "E"]
    assert len(e_at) == 8  # two per completed interval
    pairs = list(zip(e_at[0::2], e_at[1::2]))
    assert all(b == a + 1 for a, b in pairs)
    # each raw frame must carry exactly the input sample at its position
    xs = [int(v) for v in x]
    counts = {"A": 3, "B": 2, "C": 4, "D": 6, "E": 1}
    pos = 0
    for word, tag in zip(words, tags):
        if tag == "E":
            assert bitio.sign_extend(word & 0xFFF, 12) == xs[pos]
        pos += counts[tag]


def test_single_raw_frame_per_resync_event_mode():
    rng = np.random.default_rng(5)
    x = np.cumsum(rng.integers(-1, 2, size=4 * 64 + 30)).astype(np.int64)
    cfg = EncoderConfig(resync_interval_samples=64, resync_e_frames=1)
    tags = frame_tags(encoder.encode_channel(x, cfg))
    assert tags.count("E") == 4


def test_sample_count_is_conserved_across_frames():
    rng = np.random.default_rng(11)
    x = rng.integers(-2048, 2048, size=997)
    words = encoder.encode_channel(x, EncoderConfig(resync_interval_samples=100))
    counts = {"A": 3, "B": 2, "C": 4, "D": 6, "E": 1}
    assert sum(counts[t] for t in frame_tags(words)) == 997


signal_st = st.one_of(
    st.lists(st.integers(min_value=-2048, max_value=2047), max_size=200),
    st.builds(
        lambda seed, n, step: np.cumsum(
            np.random.default_rng(seed).integers(-step, step + 1, size=n)
        )
        .clip(-2048, 2047)
        .tolist(),
        st.integers(0, 2**16),
        st.integers(0, 300),
        st.sampled_from([1, 3, 20]),
    ),
)


@settings(max_examples=60, deadline=None)
@given(
    signal_st,
    st.integers(min_value=1, max_value=4),
    st.sampled_from([0, 7, 64, 2048]),
    st.sampled_from([1, 2]),
)
def test_streaming_encoder_equals_the_indexed_fast_path(xs, order, interval, e_frames):
    cfg = EncoderConfig(
        resync_interval_samples=interval, order=order, resync_e_frames=e_frames
    )
    enc = encoder.ChannelEncoder(cfg)
    streamed = []
    for x in xs:
        streamed.extend(enc.push_sample(int(x)))
    streamed.extend(enc.flush())
    words, positions = encoder.encode_channel_indexed(xs, cfg)
    assert words == streamed
    assert len(positions) == len(words)
    assert positions == sorted(positions)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(0, 2**16),
    st.integers(0, 120),
    st.integers(min_value=1, max_value=4),
    st.sampled_from([0, 50]),
)
def test_multichannel_stream_agrees_with_per_channel_arrays(seed, n, nch, interval):
    rng = np.random.default_rng(seed)
    chans = [rng.integers(-600, 600, size=n).tolist() for _ in range(nch)]
    cfg = EncoderConfig(resync_interval_samples=interval, channel_count=nch)
    by_arrays = encoder.encode_channels(chans, cfg)
    round_robin = [(c, chans[c][i]) for i in range(n) for c in range(nch)]
    by_stream = encoder.encode_multichannel(round_robin, cfg)
    assert by_stream.channel_frames == by_arrays.channel_frames
    assert by_stream.emission_log == by_arrays.emission_log


def test_emission_log_is_channel_tagged_and_complete():
    chans = [[0] * 13, [500] * 13]
    cfg = EncoderConfig(channel_count=2, resync_interval_samples=0)
    result = encoder.encode_channels(chans, cfg)
    assert sorted(ch for ch, _ in result.emission_log) == sorted(
        [0] * len(result.channel_frames[0]) + [1] * len(result.channel_frames[1])
    )
    for ch in (0, 1):
        assert [w for c, w in result.emission_log if c == ch] == result.channel_frames[ch]


def test_encode_channels_validates_shape():
    cfg = EncoderConfig(channel_count=2)
    with pytest.raises(ValueError):
        encoder.encode_channels([[0, 1]], cfg)
    with pytest.raises(ValueError):
        encoder.encode_channels([[0, 1], [0]], cfg)


def test_multichannel_stream_rejects_unknown_channel():
    cfg = EncoderConfig(channel_count=2)
    with pytest.raises(ValueError):
        encoder.encode_multichannel([(2, 0)], cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        EncoderConfig(resync_interval_samples=-1)
    with pytest.raises(ValueError):
        EncoderConfig(channel_count=0)
    with pytest.raises(ValueError):
        EncoderConfig(channel_count=5)
    with pytest.raises(ValueError):
        EncoderConfig(order=7)
    with pytest.raises(ValueError):
        EncoderConfig(resync_e_frames=3)
