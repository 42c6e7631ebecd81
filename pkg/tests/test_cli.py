import numpy as np
import pytest

from eigenclass.cli import main, parse_coeffs
from eigenclass.dataset import GrayImage, load_image, save_pgm
from eigenclass.evaluation import ConfusionMatrix
from eigenclass.persistence import load_model


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--train", "15", "--test", "5", "--size", "16x16", "--noise", "30", "--out", str(out)]) == 0
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_parse_coeffs():
    assert parse_coeffs("133") == [133]
    assert parse_coeffs("10..200") == list(range(10, 201))


def test_synth_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--train", "3", "--test", "2", "--size", "12x10", "--seed", "42", "--out", str(tmp_path / name)]) == 0
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")
    assert len(list((tmp_path / "a").rglob("*.pgm"))) == 10


def test_synth_age_shaped_and_single_sample(tmp_path, capsys):
    code, out, _ = run(capsys, "synth", "--classes", "4", "--train", "100", "--test", "50", "--size", "8x8", "--out", tmp_path / "age")
    assert code == 0
    assert len(list((tmp_path / "age").rglob("*.pgm"))) == 600
    code, _, _ = run(capsys, "synth", "--train", "1", "--test", "1", "--size", "8x8", "--out", tmp_path / "one")
    assert code == 0
    code, out, _ = run(capsys, "train", tmp_path / "one" / "manifest.tsv", "--size", "8x8", "--coeffs", "10", "--out", tmp_path / "one.eigc")
    assert code == 0 and "retained components: 1" in out


def test_train_predict_evaluate(tmp_path, capsys, synth_dir):
    manifest = synth_dir / "manifest.tsv"
    model = tmp_path / "m.eigc"
    code, out, err = run(capsys, "train", manifest, "--size", "16x16", "--feature", "dct", "--coeffs", "133", "--out", model)
    assert code == 0, err
    assert "class class0: 15 training images" in out
    loaded = load_model(model)
    assert (loaded.feature_config.kind, loaded.feature_config.n_coeffs) == ("dct", 133)

    code, out, _ = run(capsys, "predict", model, synth_dir / "train" / "class1_0002.pgm", "--rule", "knn1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "class1"
    assert len(lines) == 2 and lines[1].endswith("0.000000")

    code, out, _ = run(capsys, "predict", model, synth_dir / "test" / "class0_0000.pgm")
    dists = [float(ln.split("\t")[-1]) for ln in out.splitlines()[1:]]
    assert code == 0 and len(dists) == 5 and dists == sorted(dists)

    code, out, _ = run(capsys, "predict", model, synth_dir / "test" / "class0_0000.pgm", "--rule", "centroid")
    assert code == 0 and out.splitlines() == [out.strip()] and out.strip() in ("class0", "class1")

    report = tmp_path / "cm.csv"
    code, out, _ = run(capsys, "evaluate", model, manifest, "--rule", "knn3", "--out", report)
    assert code == 0
    cm = ConfusionMatrix.from_csv(report.read_text())
    printed = float(out.split("recognition rate ")[1].split()[0])
    assert printed == round(cm.correct / cm.total, 4)
    first = report.read_bytes()
    run(capsys, "evaluate", model, manifest, "--rule", "knn3", "--out", report)
    assert report.read_bytes() == first


def test_train_raw_dimension(tmp_path, capsys, synth_dir):
    code, out, _ = run(capsys, "train", synth_dir / "manifest.tsv", "--size", "16x16", "--feature", "raw", "--out", tmp_path / "r.eigc")
    assert code == 0 and "dimension 256" in out
    assert load_model(tmp_path / "r.eigc").eigenspace.n == 256


def test_error_paths(tmp_path, capsys, synth_dir):
    code, _, err = run(capsys, "train", tmp_path / "missing.tsv", "--out", tmp_path / "x.eigc")
    assert code == 1 and "missing.tsv" in err

    model = tmp_path / "m.eigc"
    assert run(capsys, "train", synth_dir / "manifest.tsv", "--size", "16x16", "--coeffs", "20", "--out", model)[0] == 0
    wrong = tmp_path / "wrong.pgm"
    save_pgm(GrayImage(np.zeros((8, 8))), wrong)
    code, out, err = run(capsys, "predict", model, wrong)
    assert code == 1 and "DimensionMismatch" in err and out == ""

    only_train = tmp_path / "train_only.tsv"
    lines = (synth_dir / "manifest.tsv").read_text().splitlines()
    only_train.write_text("\n".join(ln for ln in lines if ln.endswith("\ttrain")) + "\n")
    code, _, err = run(capsys, "evaluate", model, only_train, "--root", synth_dir)
    assert code == 1 and "EmptyInput" in err

    code, _, err = run(capsys, "sweep", synth_dir / "manifest.tsv", "--size", "16x16", "--out", tmp_path / "nodir" / "s.csv")
    assert code == 1 and "nodir" in err


def test_sweep_cli(tmp_path, capsys, synth_dir):
    out = tmp_path / "s.csv"
    code, _, err = run(capsys, "sweep", synth_dir / "manifest.tsv", "--size", "16x16", "--coeffs", "10..20",
                       "--k", "1,3", "--centroid", "--confusion", "12:knn3", "--out", out)
    assert code == 0, err
    rows = out.read_text().splitlines()
    assert rows[0] == "n_coeffs,rule,rate" and len(rows) == 1 + 11 * 3
    assert rows[1].startswith("10,knn1,")
    assert (tmp_path / "confusion_12_knn3.csv").exists()

    code, _, _ = run(capsys, "sweep", synth_dir / "manifest.tsv", "--size", "16x16", "--feature", "raw", "--k", "1", "--out", out)
    assert code == 0 and len(out.read_text().splitlines()) == 2


def test_export_eigenfaces(tmp_path, capsys, synth_dir):
    model = tmp_path / "r.eigc"
    run(capsys, "train", synth_dir / "manifest.tsv", "--size", "16x16", "--feature", "raw", "--out", model)
    code, _, _ = run(capsys, "export-eigenfaces", model, "--count", "6", "--out", tmp_path / "ef")
    files = sorted(p.name for p in (tmp_path / "ef").iterdir())
    assert code == 0 and len(files) == 7 and "mean.pgm" in files
    img = load_image(tmp_path / "ef" / "eigenface_0.pgm")
    assert img.size == (16, 16) and 0 <= img.pixels.min() and img.pixels.max() <= 255

    code, _, _ = run(capsys, "export-eigenfaces", model, "--count", "0", "--out", tmp_path / "ef0")
    assert code == 0 and [p.name for p in (tmp_path / "ef0").iterdir()] == ["mean.pgm"]

    code, _, err = run(capsys, "export-eigenfaces", model, "--count", "999", "--out", tmp_path / "ef1")
    assert code == 1 and "IndexOutOfRange" in err
