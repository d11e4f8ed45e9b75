import json
import math

import numpy as np
import pytest

from lpdecode import TannerGraph, load_alist
from lpdecode.harness.channel import (code_rate, llr_awgn, llr_bsc, noise_variance_from_snr,
                                      transmit_bsc)
from lpdecode.harness.cli import main
from lpdecode.harness.codes import (CodeConstructionError, Encoder, generate_regular_code,
                                    girth_at_least_six, nullspace_gf2)
from lpdecode.harness.config import ConfigError, ExperimentConfig, parse_config
from lpdecode.harness.experiment import (TrialRecord, histogram, run_experiment, summarize,
                                         upper_confidence)

from conftest import H1


class TestChannel:
    @pytest.mark.parametrize("r,var,want", [(0.5, 1.0, 1.0), (0.0, 1.0, 0.0), (-1.0, 0.5, -4.0)])
    def test_awgn_examples(self, r, var, want):
        assert llr_awgn([r], var)[0] == want

    def test_awgn_rejects_zero_variance(self):
        with pytest.raises(ValueError):
            llr_awgn([1.0], 0.0)

    def test_bsc_examples(self):
        with pytest.warns(RuntimeWarning):
            gamma = llr_bsc([0, 1], 0.1)
        assert gamma == pytest.approx([math.log(9), -math.log(9)])

    def test_bsc_jitter_bound(self):
        gamma = llr_bsc(np.zeros(1000, int), 0.1, 1e-4, np.random.default_rng(0))
        assert np.abs(gamma - math.log(9)).max() <= 1e-4

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.7])
    def test_bsc_crossover_range(self, p):
        with pytest.raises(ValueError):
            llr_bsc([0], p, 1e-3)

    def test_snr_convention(self):
        # rate 1/2 at 0 dB gives unit variance
        assert noise_variance_from_snr(0.0, code_rate(48, 96)) == pytest.approx(1.0)
        assert noise_variance_from_snr(10.0, 0.5) == pytest.approx(0.1)
        with pytest.raises(ValueError):
            noise_variance_from_snr(float("inf"), 0.5)

    def test_bsc_flip_rate(self):
        gamma = transmit_bsc(np.zeros(20000, int), 0.1, 1e-6, np.random.default_rng(1))
        assert abs(np.mean(gamma < 0) - 0.1) < 0.01


class TestCodes:
    def test_regular_structure(self):
        g = generate_regular_code(3, 6, 96, seed=0)
        h = g.to_dense()
        assert (g.m, g.n) == (48, 96)
        assert (h.sum(axis=1) == 6).all() and (h.sum(axis=0) == 3).all()
        assert girth_at_least_six(g)

    def test_single_edge(self):
        assert generate_regular_code(1, 1, 1).to_dense().tolist() == [[1]]

    def test_indivisible(self):
        with pytest.raises(ValueError):
            generate_regular_code(3, 6, 97)

    def test_deterministic(self):
        a = generate_regular_code(3, 6, 48, seed=5).to_dense()
        b = generate_regular_code(3, 6, 48, seed=5).to_dense()
        assert (a == b).all()

    def test_tiny_code_fails(self):
        with pytest.raises(CodeConstructionError):
            generate_regular_code(3, 6, 6, retries=2, max_passes=50)

    def test_girth_detects_four_cycle(self):
        assert not girth_at_least_six(TannerGraph.from_dense([[1, 1, 0], [1, 1, 1]]))

    def test_encoder(self, h1):
        enc = Encoder(h1)
        assert enc.dimension == 2
        words = {tuple(enc.encode(i)) for i in ([0, 0], [0, 1], [1, 0], [1, 1])}
        assert len(words) == 4 and all(h1.is_codeword(w) for w in words)

    def test_nullspace(self):
        h = np.array([[1, 1, 0], [0, 1, 1]])
        basis = nullspace_gf2(h)
        assert basis.tolist() == [[1, 1, 1]]


class TestConfig:
    def test_round_trip(self):
        cfg = ExperimentConfig(code_n=48, snr_db=1.5, decoder="alp", record_traces=True)
        assert parse_config(cfg.to_text()) == cfg

    def test_comments_and_dashes(self):
        cfg = parse_config("# note\n\ncode-n = 48\nchannel = bsc\n")
        assert cfg.code_n == 48 and cfg.channel == "bsc"

    @pytest.mark.parametrize("text", [
        "bogus = 1", "trials = 0", "decoder = bp", "trials = many",
        "channel = bsc\ncrossover = 0.6", "snr_db = nan", "no equals sign",
    ])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_override(self):
        assert parse_config("trials = 5", trials=7).trials == 7


class TestSummary:
    def test_upper_confidence(self):
        assert upper_confidence([]) is None
        assert upper_confidence([4.0]) == 4.0
        assert upper_confidence([2.0, 2.0, 2.0]) == 2.0
        assert upper_confidence([1.0, 3.0]) > 2.0

    def test_histogram(self):
        recs = [TrialRecord(k, "0", s, it, [], [], [], 0, False)
                for k, (s, it) in enumerate([("integral", 2), ("integral", 2), ("fractional", 5)])]
        assert histogram(recs) == [(5, 1, "fractional"), (2, 2, "integral")]
        summ = summarize(recs)
        assert summ["classes"]["integral"]["mean_iterations"] == 2.0
        assert summ["frame_errors"] == 1


def h1_config(tmp_path, **kw):
    base = dict(snr_db=10.0, trials=100, decoder="malp-b", oracle_fraction=1.0,
                output_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


class TestExperiment:
    def test_h1_high_snr(self, tmp_path, h1):
        res = run_experiment(h1_config(tmp_path), graph=h1)
        integral = [r for r in res.records if r.status == "integral"]
        assert len(integral) >= 99
        assert all(r.oracle_match is not False for r in res.records)
        assert res.summary["oracle_mismatches"] == 0

    def test_outputs_are_byte_identical(self, tmp_path):
        files = ("config.txt", "records.jsonl", "summary.json", "histogram.csv")
        blobs = []
        d = tmp_path / "run"
        for _ in range(2):
            cfg = ExperimentConfig(code_n=48, snr_db=2.0, trials=6, record_traces=True,
                                   output_dir=str(d))
            run_experiment(cfg)
            traces = sorted((d / "traces").iterdir())
            blobs.append([(d / f).read_bytes() for f in files]
                         + [p.read_bytes() for p in traces])
        assert blobs[0] == blobs[1]

    def test_record_fields(self, tmp_path):
        cfg = ExperimentConfig(code_n=48, trials=3, output_dir=str(tmp_path))
        res = run_experiment(cfg, write=False)
        for rec in res.records:
            assert len(rec.lp_sizes) == rec.outer_iterations - 1
            assert len(rec.linear_iterations) == len(rec.ipm_iterations)
            assert json.loads(rec.to_json())["schema_version"] == 1

    def test_random_codewords(self, tmp_path, h1):
        res = run_experiment(h1_config(tmp_path, codeword="random", trials=40), graph=h1,
                             write=False)
        assert len({r.codeword_id for r in res.records}) > 1
        assert sum(r.bit_errors for r in res.records) == 0

    def test_codeword_independence(self, tmp_path):
        # channel symmetry: integral rates agree within Monte-Carlo error
        rates = []
        for cw in ("zero", "random"):
            cfg = ExperimentConfig(code_n=48, snr_db=1.5, trials=80, codeword=cw,
                                   output_dir=str(tmp_path))
            res = run_experiment(cfg, write=False)
            rates.append(np.mean([r.status == "integral" for r in res.records]))
        pooled = np.mean(rates)
        se = math.sqrt(2 * pooled * (1 - pooled) / 80)
        assert abs(rates[0] - rates[1]) <= 4 * se + 1e-12

    def test_bsc(self, tmp_path, h1):
        res = run_experiment(h1_config(tmp_path, channel="bsc", crossover=0.01, trials=30),
                             graph=h1, write=False)
        assert res.summary["oracle_mismatches"] == 0


class TestCli:
    def test_gen_code_and_decode(self, tmp_path, capsys):
        alist = tmp_path / "code.alist"
        assert main(["gen-code", "--n", "48", "--seed", "2", "-o", str(alist)]) == 0
        g = load_alist(alist)
        assert (g.m, g.n) == (24, 48)
        llr = tmp_path / "llr.txt"
        llr.write_text(" ".join(["2.0"] * 47 + ["-0.5"]))
        out = tmp_path / "out.json"
        assert main(["decode", str(alist), str(llr), "-o", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["status"] == "integral" and sum(payload["bits"]) == 0

    def test_decode_length_mismatch(self, tmp_path, capsys):
        alist = tmp_path / "h1.alist"
        from lpdecode import save_alist
        save_alist(TannerGraph.from_dense(H1), alist)
        llr = tmp_path / "llr.txt"
        llr.write_text("1 1 1")
        assert main(["decode", str(alist), str(llr)]) == 2

    def test_experiment(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("code_n = 48\ntrials = 2\n")
        assert main(["experiment", str(cfg), "--set", "decoder=alp",
                     "--output-dir", str(tmp_path / "res")]) == 0
        summary = json.loads((tmp_path / "res" / "summary.json").read_text())
        assert summary["decoder"] == "alp" and summary["trials"] == 2

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("trials = 0\n")
        assert main(["experiment", str(cfg)]) == 2
        assert "trials" in capsys.readouterr().err
