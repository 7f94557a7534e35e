"""Quick end-to-end check of the Python bindings.

Build the extension and put it on the path first, e.g.

    cargo build --release -p abusenet-py --features extension-module
    cp target/release/libabusenet_py.so python/abusenet_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import abusenet_py as ab  # noqa: E402

DATA = os.path.join(HERE, "..", "crates", "core", "data", "overfit.tsv")


def main():
    assert ab.CLASSES == ["normal", "spam", "hateful", "abusive"]

    table = ab.UnigramTable({"you": 40, "a": 60, "stupid": 50, "person": 40, "the": 10000})
    assert ab.segment_word("stupidperson", table) == ["stupid", "person"]
    assert ab.collapse_elongation("sooooo") == "soo"
    print("pipeline:", ab.preprocess_text("You're a STUPIDPERSON!!!", table))

    vocab = ab.Vocabulary.build([["you", "are", "you"], ["are", "nice"]])
    ids, length = vocab.encode(["you", "unseen"], 4)
    assert length == 2 and ids[1] == 1 and ids[2:] == [0, 0]

    report = ab.evaluate_labels(["normal", "spam", "abusive"], ["normal", "spam", "hateful"])
    assert abs(report["accuracy"] - 2 / 3) < 1e-12

    err = ab.gradient_check(0)
    assert err <= 1e-4, err

    model, history, report = ab.train(
        DATA, DATA, epochs=3, batch_size=16, embed_dim=16, hidden=8, attn=6, seed=1
    )
    assert len(history) == 12, len(history)
    print("val accuracy after 3 epochs:", report["accuracy"])

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "m.ablm")
        model.save(path)
        again = ab.Classifier.load(path, hidden=8)
        a = model.predict("click free prize now")
        b = again.predict("click free prize now")
        assert a == b
        assert math.isclose(sum(a["probs"].values()), 1.0, abs_tol=1e-9)
        assert math.isclose(sum(a["attention"]), 1.0, abs_tol=1e-9)
        print("prediction:", a["label"], a["probs"])
        try:
            ab.Classifier.load(path, hidden=128)
        except ValueError as e:
            print("dimension check:", e)
        else:
            raise AssertionError("hidden size mismatch not reported")
    print("ok")


if __name__ == "__main__":
    main()
