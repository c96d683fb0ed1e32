"""Smoke test for the screencode Python bindings.

Build the extension first:

    cargo build -p screencode-py

then run `python3 python/smoke_test.py`. The script copies the built shared
library into a temporary directory under the importable module name.
"""

import importlib
import os
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module(tmp):
    candidates = []
    for profile in ("debug", "release"):
        for name in ("libscreencode_py.so", "libscreencode_py.dylib", "screencode_py.dll"):
            p = ROOT / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("extension not built; run `cargo build -p screencode-py`")
    newest = max(candidates, key=lambda p: p.stat().st_mtime)
    suffix = ".pyd" if newest.suffix == ".dll" else ".so"
    shutil.copy(newest, os.path.join(tmp, "screencode_py" + suffix))
    sys.path.insert(0, tmp)
    return importlib.import_module("screencode_py")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        sc = load_module(tmp)
        print("screencode_py", sc.__version__)

        assert sc.scene_names() == ["gai", "web", "docs"], sc.scene_names()
        assert len(sc.action_names()) == 8
        assert sc.compatible_scenes("searching_internet") == ["web"]
        assert sc.check_compatibility(["web"], ["prompting_gai", "copy_and_paste"]) == ["prompting_gai"]

        label = sc.parse_label('Sure: {"scenes": ["docs"], "actions": ["ticking_answers"]}')
        assert label["scenes"] == ["docs"] and label["actions"] == ["ticking_answers"], label
        try:
            sc.parse_label("no json here")
        except ValueError:
            pass
        else:
            raise AssertionError("parse_label accepted garbage")

        assert abs(sc.cohen_kappa(["a", "b", "a", "b"], ["a", "b", "a", "b"]) - 1.0) < 1e-12

        r = sc.reflect("v/u00", ["web"], ["prompting_gai"], {"prompting_gai": 0.8})
        assert r.flagged and abs(r.confidences["prompting_gai"] - 0.5) < 1e-12, r

        rec = sc.LabelRecord("v/u01", ["docs"], ["ticking_answers"])
        assert sc.LabelRecord.from_dict(rec.to_dict()) == rec
        assert rec.violations() == []

        corpus = os.path.join(tmp, "corpus")
        gold = sc.synthesize(corpus, seed=7, n_videos=2, video_length_s=60.0)
        assert len(gold) == 6, len(gold)
        digest = sc.directory_digest(corpus)
        sc.synthesize(os.path.join(tmp, "again"), seed=7, n_videos=2, video_length_s=60.0)
        assert sc.directory_digest(os.path.join(tmp, "again")) == digest

        report = sc.evaluate(gold, gold)
        assert report["scene_macro_f1"] == 1.0, report

        for mode in ("workflow", "react", "single"):
            out = os.path.join(tmp, "run-" + mode)
            manifest = sc.run_mock(corpus, out, os.path.join(corpus, "mock_script.tsv"), mode=mode, jobs=2)
            assert manifest["units_total"] == 6, manifest
            pred = sc.read_labels(os.path.join(out, "predictions.tsv"))
            assert len(pred) == 6
            print(mode, "action macro F1", round(sc.evaluate(gold, pred)["action_macro_f1"], 3))

        code = sc.main(["eval", "--gold", os.path.join(corpus, "gold.tsv"),
                        "--pred", os.path.join(tmp, "run-workflow", "predictions.tsv"), "--format", "json"])
        assert code == 0, code
        assert sc.main(["run", "--in", corpus, "--out", os.path.join(tmp, "x")]) == 1

    print("smoke test passed")


if __name__ == "__main__":
    main()
