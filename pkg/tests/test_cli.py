import json

import numpy as np
import pytest

from vista.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, main
from vista.io_formats import load_predictions, write_tensor_file
from vista.rng import CounterRng


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "synth"
    code = main(
        [
            "synth", "--seed", "7", "--n-examples", "4", "--n-nouns", "3", "--n-verbs", "3",
            "--gts-per-example", "2", "--n-sources", "2", "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    return out


class TestSynthCommand:
    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["synth", "--seed", "7", "--out", str(out)]) == EXIT_OK
            outs.append(out)
        for fname in ("ground_truth.json", "predictions_source_00.json"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


class TestEvaluateCommand:
    def test_perfect_instance_scores_100(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "eval"
        code = main(
            [
                "evaluate",
                str(synth_dir / "ground_truth.json"),
                str(synth_dir / "predictions_source_00.json"),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert stdout.count("100.00") == 4
        report = json.loads((out / "report.json").read_text())
        assert report["map_overall"] == 100.0
        assert (out / "report.txt").exists()

    def test_missing_file_exit_1(self, synth_dir, capsys):
        code = main(["evaluate", "/nonexistent/gt.json", str(synth_dir / "predictions_source_00.json")])
        assert code == EXIT_IO
        assert "nonexistent" in capsys.readouterr().err

    def test_corrupt_json_exit_2(self, synth_dir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        code = main(["evaluate", str(bad), str(synth_dir / "predictions_source_00.json")])
        assert code == EXIT_VALIDATION
        assert "line" in capsys.readouterr().err


class TestPostprocessCommand:
    def make_head_outputs(self, path, n_proposals, n_nouns=3, n_verbs=3):
        rng = CounterRng(5)
        boxes = []
        for _ in range(n_proposals):
            x1 = rng.uniform(0, 500)
            y1 = rng.uniform(0, 300)
            boxes.append([x1, y1, x1 + rng.uniform(20, 200), y1 + rng.uniform(20, 150)])
        tensors = {
            "proposal_boxes": np.array(boxes),
            "objectness": np.array([rng.uniform(0.05, 1.0) for _ in range(n_proposals)]),
            "noun_logits": np.array(
                [[rng.gaussian() for _ in range(n_nouns)] for _ in range(n_proposals)]
            ),
            "verb_logits": np.array(
                [[rng.gaussian() for _ in range(n_verbs)] for _ in range(n_proposals)]
            ),
            "box_deltas": np.array(
                [[[rng.gaussian(0, 0.05) for _ in range(4)] for _ in range(n_nouns)]
                 for _ in range(n_proposals)]
            ),
            "ttc_raw": np.array([rng.gaussian() for _ in range(n_proposals)]),
            "quality": np.array([rng.uniform(0.05, 1.0) for _ in range(n_proposals)]),
        }
        write_tensor_file(tensors, path)

    def write_taxonomy(self, path, n_nouns=3, n_verbs=3):
        path.write_text(
            json.dumps(
                {
                    "nouns": [f"n{i}" for i in range(n_nouns)],
                    "verbs": [f"v{i}" for i in range(n_verbs)],
                }
            )
        )

    def test_export_cap(self, tmp_path):
        heads = tmp_path / "heads.vstf"
        taxonomy = tmp_path / "taxonomy.json"
        self.make_head_outputs(heads, 300)
        self.write_taxonomy(taxonomy)
        out = tmp_path / "pp"
        code = main(["postprocess", str(heads), str(taxonomy), "--out", str(out)])
        assert code == EXIT_OK
        preds = load_predictions(out / "submission.json")
        assert set(preds) == {"heads"}
        assert 0 < len(preds["heads"]) <= 100

    def test_empty_proposals_exit_0(self, tmp_path):
        heads = tmp_path / "empty.vstf"
        taxonomy = tmp_path / "taxonomy.json"
        write_tensor_file({}, heads)
        self.write_taxonomy(taxonomy)
        out = tmp_path / "pp"
        code = main(["postprocess", str(heads), str(taxonomy), "--out", str(out)])
        assert code == EXIT_OK
        doc = json.loads((out / "submission.json").read_text())
        assert doc["results"] == {}

    def test_k_noun_1_uses_argmax(self, tmp_path):
        heads = tmp_path / "heads.vstf"
        taxonomy = tmp_path / "taxonomy.json"
        self.make_head_outputs(heads, 10)
        self.write_taxonomy(taxonomy)
        out = tmp_path / "pp"
        code = main(
            ["postprocess", str(heads), str(taxonomy), "--k-noun", "1", "--k-verb", "1",
             "--nms-iou", "0.99", "--out", str(out)]
        )
        assert code == EXIT_OK
        from vista.io_formats import read_tensor_file
        from vista.postprocess import softmax

        tensors = read_tensor_file(heads)
        argmax_nouns = {int(np.argmax(softmax(row))) for row in tensors["noun_logits"]}
        preds = load_predictions(out / "submission.json")
        assert {h.noun_id for h in preds["heads"]} <= argmax_nouns


class TestEnsembleCommand:
    def test_single_input_preserves_order(self, synth_dir, tmp_path):
        out = tmp_path / "ens"
        src = synth_dir / "predictions_source_00.json"
        code = main(["ensemble", str(src), "--out", str(out)])
        assert code == EXIT_OK
        merged = load_predictions(out / "ensemble.json")
        original = load_predictions(src)
        for uid in original:
            assert [(h.noun_id, h.verb_id) for h in merged[uid]] == [
                (h.noun_id, h.verb_id) for h in original[uid]
            ]

    def test_duplicated_input_matches_single_ranking(self, synth_dir, tmp_path):
        src = synth_dir / "predictions_source_00.json"
        single = tmp_path / "single"
        double = tmp_path / "double"
        assert main(["ensemble", str(src), "--out", str(single)]) == EXIT_OK
        assert main(["ensemble", str(src), str(src), "--out", str(double)]) == EXIT_OK
        a = load_predictions(single / "ensemble.json")
        b = load_predictions(double / "ensemble.json")
        for uid in a:
            assert [(h.noun_id, h.verb_id) for h in a[uid]] == [
                (h.noun_id, h.verb_id) for h in b[uid]
            ]
            for ha, hb in zip(a[uid], b[uid]):
                assert ha.box.corners() == pytest.approx(hb.box.corners(), abs=1e-9)

    def test_taxonomy_mismatch_exit_2(self, synth_dir, tmp_path):
        tiny = tmp_path / "tiny_taxonomy.json"
        tiny.write_text(json.dumps({"nouns": ["only"], "verbs": ["one"]}))
        code = main(
            ["ensemble", str(synth_dir / "predictions_source_00.json"), "--taxonomy", str(tiny)]
        )
        assert code == EXIT_VALIDATION


class TestPlanCommand:
    def test_paper_example(self, capsys):
        assert main(["plan", "--time", "4.0"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "0.5 1 1.5 2 2.5 3 3.5 4"

    def test_negative_time_exit_2(self, capsys):
        assert main(["plan", "--time", "-1.0"]) == EXIT_VALIDATION


class TestFuseDemoCommand:
    def test_prints_kernel_diagnostics(self, tmp_path, capsys):
        rng = CounterRng(6)
        seq = np.array([[rng.gaussian() for _ in range(4)] for _ in range(3)])
        path = tmp_path / "fuse.vstf"
        write_tensor_file({"seq": seq}, path)
        assert main(["fuse-demo", str(path), "--seed", "1"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "probe weights:" in out
        assert "film identity max |delta|: 0" in out
        assert "fused roi 0 norm:" in out


class TestValidateCommand:
    def test_round_trip_submission_validates(self, synth_dir, capsys):
        assert main(["validate", str(synth_dir / "predictions_source_00.json")]) == EXIT_OK
        assert "valid submission" in capsys.readouterr().out

    def test_ground_truth_validates(self, synth_dir):
        assert main(["validate", str(synth_dir / "ground_truth.json")]) == EXIT_OK

    def test_tensor_container_validates(self, tmp_path):
        path = tmp_path / "t.vstf"
        write_tensor_file({"a": np.ones(3, dtype=np.float32)}, path)
        assert main(["validate", str(path)]) == EXIT_OK

    def test_garbage_exit_2(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text("[1, 2, 3]")
        assert main(["validate", str(path)]) == EXIT_VALIDATION
