import json

import numpy as np
import pytest

from bregpath.losses import Dataset, Theta, make_loss
from bregpath.serialize import (read_dataset_csv, read_json, read_path,
                                read_theta_json, write_dataset_csv,
                                write_edges_csv, write_json, write_path,
                                write_cv_report, write_theta_json)
from bregpath.simulate import LogisticSpec, gen_logistic
from bregpath.solver import SolverConfig, run_path
from bregpath.evaluate import kfold_cv_logistic


def test_dataset_round_trip_labeled(tmp_path, rng):
    X = rng.standard_normal((7, 3))
    y = np.where(rng.random(7) < 0.5, 1.0, -1.0)
    path = tmp_path / "d.csv"
    write_dataset_csv(path, Dataset(X, y))
    back = read_dataset_csv(path)
    assert np.array_equal(back.X, X)
    assert np.array_equal(back.y, y)
    # byte-identical rewrite
    again = tmp_path / "d2.csv"
    write_dataset_csv(again, back)
    assert again.read_bytes() == path.read_bytes()


def test_dataset_round_trip_unlabeled(tmp_path, rng):
    X = rng.choice([-1.0, 1.0], size=(5, 4))
    path = tmp_path / "s.csv"
    write_dataset_csv(path, Dataset(X))
    back = read_dataset_csv(path)
    assert back.y is None
    assert np.array_equal(back.X, X)


def test_dataset_width_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x1,x2\n1.0,2.0\n1.0\n")
    with pytest.raises(ValueError):
        read_dataset_csv(path)


def test_theta_round_trip(tmp_path):
    theta = Theta(np.array([0.25]), np.array([0.0, -1.5, 0.0, 2.0]))
    path = tmp_path / "t.json"
    write_theta_json(path, theta, "logistic", 4)
    back, obj = read_theta_json(path)
    assert np.array_equal(back.alpha, theta.alpha)
    assert np.array_equal(back.beta, theta.beta)
    assert obj["support"] == [1, 3]
    assert obj["kind"] == "logistic"


def test_path_round_trip_preserves_digest(tmp_path):
    data, _ = gen_logistic(LogisticSpec(p=8, s=2, n=60, seed=17))
    model = make_loss("logistic", data.X, data.y)
    path = run_path(model, SolverConfig(max_iters=90, checkpoint_stride=7))
    csv_p, json_p = tmp_path / "p.csv", tmp_path / "p.json"
    write_path(csv_p, json_p, path)
    back = read_path(csv_p, json_p)
    assert back.digest() == path.digest()
    assert json.loads(json_p.read_text())["digest"] == path.digest()
    assert back.meta["k_max"] == path.meta["k_max"]
    # never-entered coordinates survive the null/inf conversion
    assert np.array_equal(np.isinf(back.entry_iteration),
                          np.isinf(path.entry_iteration))
    # byte-identical rewrite
    csv_q, json_q = tmp_path / "q.csv", tmp_path / "q.json"
    write_path(csv_q, json_q, back)
    assert csv_q.read_bytes() == csv_p.read_bytes()
    assert json_q.read_bytes() == json_p.read_bytes()


def test_path_reader_validates(tmp_path):
    csv_p, json_p = tmp_path / "p.csv", tmp_path / "p.json"
    write_json(json_p, {"meta": {"n_alpha": 1, "n_beta": 2},
                        "entry_iteration": [None, None]})
    csv_p.write_text("wrong,header\n")
    with pytest.raises(ValueError, match="header"):
        read_path(csv_p, json_p)
    csv_p.write_text("k,t,block,index,value\n0,0.0,gamma,0,1.0\n")
    with pytest.raises(ValueError, match="block"):
        read_path(csv_p, json_p)


def test_write_json_handles_numpy(tmp_path):
    path = tmp_path / "o.json"
    write_json(path, {"a": np.int64(3), "b": np.array([1.5, 2.5]),
                      "c": np.float64(0.1), "d": {"e": np.arange(2)}})
    obj = read_json(path)
    assert obj == {"a": 3, "b": [1.5, 2.5], "c": 0.1, "d": {"e": [0, 1]}}


def test_cv_report_files(tmp_path):
    data, _ = gen_logistic(LogisticSpec(p=6, s=2, n=60, seed=23))
    report = kfold_cv_logistic(data, SolverConfig(max_iters=60,
                                                  checkpoint_stride=1),
                               folds=3, grid_size=5, seed=0)
    prefix = tmp_path / "cv"
    write_cv_report(prefix, report)
    head = read_json(f"{prefix}.json")
    assert head["mode"] == "min"
    assert head["selected_k"] == report.selected_k
    lines = (tmp_path / "cv_curve.csv").read_text().strip().splitlines()
    assert lines[0] == "k,t,mean_score,fold_0,fold_1,fold_2"
    assert len(lines) == report.grid_k.size + 1


def test_edges_csv(tmp_path):
    path = tmp_path / "e.csv"
    write_edges_csv(path, [(0, 1, 0.5), (2, 4, -1.25)])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "j,j_prime,weight,sign"
    assert lines[1] == "1,2,0.5,1"
    assert lines[2] == "3,5,-1.25,-1"
