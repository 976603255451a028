"""Acceptance gate: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
"""

import hashlib
import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy.stats import kstest

from lungmix.cli import main
from lungmix.labels import (
    FOUR_CLASS,
    LabelSchema,
    LossWeights,
    cross_entropy,
    lungmix_loss,
    mixup_loss,
    unify_or,
)
from lungmix.masks import MixMask, MixParams, combine_masks, loudness_mask, random_mask, sample_lambda
from lungmix.metrics import score
from lungmix.mixing import MixRequest, apply_mix_mask, lungmix, lungmix_trace, vanilla_mixup
from lungmix.pipeline import PipelineConfig, Waveform, bandpass, mel_spectrogram, resample
from lungmix.synth import SynthSpec, synth

NAMES = ("normal", "crackle", "wheeze", "both")


@contextmanager
def criterion(n, desc, limit_s=None):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[criterion {n:02d}] FAIL - {desc}")
        raise
    elapsed = time.perf_counter() - start
    if limit_s is not None:
        assert elapsed < limit_s, f"criterion {n} took {elapsed:.2f}s (limit {limit_s}s)"
    print(f"[criterion {n:02d}] PASS - {desc} ({elapsed:.2f}s)")


def exact_rate_pairs(sp, se, scale=10000):
    correct_n = round(sp * scale / 100)
    correct_a = round(se * scale / 100)
    pairs = [("normal", "normal")] * correct_n
    pairs += [("normal", "crackle")] * (scale - correct_n)
    pairs += [("crackle", "crackle")] * correct_a
    pairs += [("crackle", "wheeze")] * (scale - correct_a)
    return pairs


def test_01_score_arithmetic_matches_reference_tables():
    cells = [(60.21, 61.67, 60.94), (70.96, 52.47, 61.71), (79.08, 47.51, 63.30)]
    with criterion(1, "score arithmetic reproduces the reference result cells", limit_s=1.0):
        for sp, se, expected_sc in cells:
            report = score(exact_rate_pairs(sp, se))
            assert report.sp == pytest.approx(sp, abs=1e-9)
            assert report.se == pytest.approx(se, abs=1e-9)
            assert abs(report.sc - expected_sc) <= 0.01


def test_02_label_algebra_exhaustive_table():
    sets = {"normal": frozenset(), "crackle": frozenset("c"), "wheeze": frozenset("w"),
            "both": frozenset("cw")}
    names_by_set = {v: k for k, v in sets.items()}
    with criterion(2, "all 16 OR pairs match bitset union", limit_s=1.0):
        for a, b in itertools.product(NAMES, repeat=2):
            got = unify_or(FOUR_CLASS.vector(a), FOUR_CLASS.vector(b)).name
            assert got == names_by_set[sets[a] | sets[b]]
        assert unify_or(FOUR_CLASS.vector("crackle"), FOUR_CLASS.vector("wheeze")).name == "both"
        for k in NAMES:
            assert unify_or(FOUR_CLASS.vector("normal"), FOUR_CLASS.vector(k)).name == k


def test_03_powerset_enumeration():
    # n base classes = normal plus n-1 abnormal; brute enumeration of the
    # abnormal subsets gives 2^(n-1) categories (the empty subset is normal)
    # and 2^(n-1) - n of them combine two or more abnormal classes
    with criterion(3, "category counts by brute subset enumeration", limit_s=1.0):
        for n in (3, 4, 5, 6):
            abnormal = tuple(f"ab{i}" for i in range(n - 1))
            schema = LabelSchema(abnormal_names=abnormal, composite_names=())
            subsets = [
                c for size in range(n) for c in itertools.combinations(abnormal, size)
            ]
            assert len(subsets) == 2 ** (n - 1)
            assert schema.n_categories == len(subsets)
            assert len(set(schema.categories())) == len(subsets)
        assert FOUR_CLASS.categories() == ("normal", "crackle", "wheeze", "both")


def test_04_mask_codomain_property():
    rng = np.random.default_rng(404)
    with criterion(4, "10k combine_masks calls stay inside {0, lam, 1}"):
        for k in range(10_000):
            n = int(rng.integers(1, 64))
            lam = float(rng.random())
            m_i = rng.random(n) > 0.5
            m_j = rng.random(n) > 0.5
            r = rng.random(n) > 0.5
            semantics = "loudness_precedence" if k % 2 == 0 else "max"
            out = combine_masks(m_i, m_j, r, lam, semantics)
            assert set(np.unique(out.values)) <= {0.0, lam, 1.0}
            union = m_i | m_j
            if semantics == "loudness_precedence":
                assert np.all(out.values[union] == lam)
            else:
                assert np.all(out.values[r] == 1.0)


def test_05_loudness_mask_oracle():
    rng = np.random.default_rng(505)
    with criterion(5, "loudness mask equals independent recomputation, 0 mismatches"):
        for _ in range(1000):
            n = int(np.exp(rng.uniform(np.log(10), np.log(100_000))))
            x = rng.standard_normal(n) * rng.uniform(0.01, 1.0) + rng.uniform(-0.3, 0.3)
            total = float(np.add.reduce(x))
            total_sq = float(np.add.reduce(x * x))
            mean = total / n
            var = max(total_sq / n - mean * mean, 0.0)
            expected = np.abs(x) > abs(mean + 2.0 * math.sqrt(var))
            assert np.array_equal(loudness_mask(Waveform(x, 16000)), expected)


def test_06_mix_boundary_identities():
    rng = np.random.default_rng(606)
    a = Waveform(rng.uniform(-0.5, 0.5, 4000), 16000)
    b = Waveform(rng.uniform(-0.5, 0.5, 4000), 16000)
    crackle, wheeze = FOUR_CLASS.vector("crackle"), FOUR_CLASS.vector("wheeze")

    def req(x, y, lam=None, strategy="lungmix"):
        return MixRequest(x, crackle, y, wheeze, MixParams(lam=lam, seed=1), strategy=strategy)

    with criterion(6, "mask boundaries, mixup symmetry, self-mix identity"):
        ones = apply_mix_mask(a, b, MixMask(np.ones(4000), lam=0.4))
        assert np.array_equal(ones.samples, a.samples)
        zeros = apply_mix_mask(a, b, MixMask(np.zeros(4000), lam=0.4))
        assert np.array_equal(zeros.samples, b.samples)
        for lam in (0.0, 0.31, 0.5, 0.77, 1.0):
            r1 = vanilla_mixup(req(a, b, lam=lam, strategy="mixup"))
            r2 = vanilla_mixup(req(b, a, lam=1.0 - lam, strategy="mixup"))
            assert np.allclose(r1.audio.samples, r2.audio.samples, atol=1e-12, rtol=0.0)
        self_mix = lungmix(MixRequest(a, crackle, a, crackle, MixParams(seed=2)))
        assert np.allclose(self_mix.audio.samples, a.samples, atol=1e-12, rtol=0.0)


def test_07_augment_determinism_across_parallelism(tmp_path):
    def digest(root):
        h = hashlib.sha256()
        for p in sorted(root.rglob("*")):
            if p.suffix in (".wav", ".jsonl"):
                h.update(p.name.encode())
                h.update(p.read_bytes())
        return h.hexdigest()

    with criterion(7, "augment runs identical across parallelism degrees", limit_s=30.0):
        corpus = tmp_path / "corpus"
        assert main(["synth", "--out", str(corpus), "--per-class", "1", "--seed", "3"]) == 0
        digests = []
        for i, workers in enumerate(("1", "4")):
            out = tmp_path / f"run{i}"
            rc = main([
                "augment", "--manifest", str(corpus / "corpus.jsonl"), "--out", str(out),
                "--strategy", "lungmix", "--mode", "nonlinear", "--alpha", "1.0",
                "--seed", "7", "--pairs", "10", "--workers", workers,
            ])
            assert rc == 0
            digests.append(digest(out))
        assert digests[0] == digests[1]


def test_08_beta_sampler_statistics():
    with criterion(8, "Beta sampler: KS vs uniform at alpha=1, symmetric means"):
        rng = np.random.default_rng(808)
        draws = np.array([sample_lambda(1.0, rng) for _ in range(100_000)])
        assert kstest(draws, "uniform").pvalue > 1e-3
        for alpha in (0.2, 1.0, 5.0):
            rng = np.random.default_rng(809)
            mean = np.mean([sample_lambda(alpha, rng) for _ in range(100_000)])
            assert abs(mean - 0.5) <= 0.01


def test_09_loss_reductions():
    rng = np.random.default_rng(909)
    crackle, wheeze = FOUR_CLASS.vector("crackle"), FOUR_CLASS.vector("wheeze")
    with criterion(9, "loss reductions: CE boundaries, ln4, rescale rule"):
        logits = rng.standard_normal(4)
        assert abs(mixup_loss(logits, crackle, wheeze, 1.0) - cross_entropy(logits, crackle)) < 1e-12
        assert abs(mixup_loss(np.zeros(4), crackle, wheeze, 0.3) - math.log(4)) < 1e-12
        assert lungmix_loss(logits, crackle, wheeze, 0.6, LossWeights(lambda2=0.0)) == \
            cross_entropy(logits, unify_or(crackle, wheeze))
        ce = cross_entropy(logits, unify_or(crackle, wheeze))
        mix_term = mixup_loss(logits, crackle, wheeze, 0.6)
        total = lungmix_loss(logits, crackle, wheeze, 0.6)
        assert abs((total - ce) - ce) < 1e-9  # rescaled term equals the CE term
        assert abs((ce / mix_term) * mix_term - ce) < 1e-9


def test_10_pipeline_shape_and_dsp():
    rng = np.random.default_rng(1010)
    cfg = PipelineConfig()
    with criterion(10, "spectrogram shape, sample arithmetic, filter response"):
        w = Waveform(rng.uniform(-0.3, 0.3, 144000), 16000)
        assert mel_spectrogram(w, cfg).bins.shape == (128, 1024)
        assert int(round(9.0 * 16000)) == 144_000

        t = np.arange(2 * 16000) / 16000
        low_tone = Waveform(0.5 * np.sin(2 * np.pi * 25.0 * t), 16000)
        out = bandpass(low_tone, 50.0, 1500.0)
        rms = lambda x: np.sqrt(np.mean(np.square(x)))
        assert rms(out.samples) / rms(low_tone.samples) <= 10 ** (-20 / 20)

        mid_tone = Waveform(0.5 * np.sin(2 * np.pi * 400.0 * t), 16000)
        out = bandpass(mid_tone, 50.0, 1500.0)
        assert rms(out.samples) / rms(mid_tone.samples) >= 10 ** (-3 / 20)

        src = Waveform(0.5 * np.sin(2 * np.pi * 440.0 * np.arange(44100) / 44100), 44100)
        res = resample(src, 16000)
        peak_hz = np.argmax(np.abs(np.fft.rfft(res.samples))) * 16000 / len(res)
        assert abs(peak_hz - 440.0) <= 4.4


def test_11_synthetic_end_to_end_oracle():
    with criterion(11, "synthetic crackle+wheeze mix: labels and exact blend", limit_s=10.0):
        wave_c, rec_c = synth(SynthSpec(label="crackle", seed=21))
        wave_w, rec_w = synth(SynthSpec(label="wheeze", seed=22))
        y_c = FOUR_CLASS.vector(rec_c.label_unified)
        y_w = FOUR_CLASS.vector(rec_w.label_unified)

        nonlinear = lungmix(MixRequest(wave_c, y_c, wave_w, y_w, MixParams(seed=23),
                                       interpolation="nonlinear"))
        assert nonlinear.label.name == "both"
        preserve = lungmix(MixRequest(wave_c, y_c, wave_w, y_w, MixParams(seed=23),
                                      interpolation="preserve"))
        assert preserve.label.name == "crackle"

        trace = lungmix_trace(MixRequest(wave_c, y_c, wave_w, y_w, MixParams(seed=23)))
        union = trace.mask_a | trace.mask_b
        blend = trace.lam * trace.audio_a.samples + (1.0 - trace.lam) * trace.audio_b.samples
        rate = wave_c.sample_rate
        checked = 0
        for onset, offset, _cls in (rec_c.events or []) + (rec_w.events or []):
            lo, hi = int(round(onset * rate)), int(round(offset * rate))
            inside = np.zeros(len(trace.mixed), dtype=bool)
            inside[lo:hi] = True
            positions = inside & union
            assert positions.any()
            assert np.array_equal(trace.mixed.samples[positions], blend[positions])
            checked += positions.sum()
        assert checked > 0
