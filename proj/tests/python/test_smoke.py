"""End-to-end smoke tests for the python bindings."""

import math

import pytest

import hinctr


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    hinctr.synth(
        str(out),
        {
            "users": "60",
            "items": "40",
            "publishers": "8",
            "articles": "40",
            "train_instances": "200",
            "test_instances": "60",
            "seed": "5",
        },
    )
    graph = hinctr.load_graph(
        str(out / "nodes.tsv"), str(out / "edges.tsv"), str(out / "schema.txt")
    )
    return out, graph


def test_graph_loads(dataset):
    _, graph = dataset
    assert graph.node_count == 148
    assert graph.edge_count > 0
    assert graph.type_of("u0") == "user"
    assert all(n.startswith(("i", "p", "a", "u")) for n in graph.neighbors("u0"))


def test_sampling(dataset):
    _, graph = dataset
    opts = {"budgets": "user=4,item=4,publisher=2,article=4"}
    nodes = hinctr.sample(graph, "u0", opts, seed=7)
    assert nodes[0] == ("u0", 0)
    assert nodes == hinctr.sample(graph, "u0", opts, seed=7)
    per_type = {}
    for name, hop in nodes[1:]:
        assert hop >= 1
        per_type.setdefault(graph.type_of(name), 0)
        per_type[graph.type_of(name)] += 1
    assert all(count <= 4 for count in per_type.values())

    pair = hinctr.sample_pair(graph, "u0", "i1", opts, seed=3)
    assert pair["nodes"][0] == "u0"
    assert pair["nodes"][1] == "i1"
    assert len(pair["nodes"]) == len(set(pair["nodes"]))


def test_masks(dataset):
    _, graph = dataset
    out = hinctr.build_masks(graph, "u0", "i1", {}, seed=11)
    n = len(out["nodes"])
    for kind in ("IG", "SG", "CG", "PG"):
        mask = out[kind]
        assert len(mask) == n
        for i in range(n):
            assert mask[i][i] == 1.0
            for j in range(n):
                assert mask[i][j] == mask[j][i]
                assert mask[i][j] >= 0.0
    assert all(v == 1.0 for row in out["PG"] for v in row)


def test_train_eval_roundtrip(dataset, tmp_path):
    out, graph = dataset
    ckpt = tmp_path / "model.ckpt"
    epochs = hinctr.train(
        graph,
        str(out / "train.tsv"),
        str(out / "test.tsv"),
        {
            "epochs": "2",
            "budgets": "user=4,item=4,publisher=2,article=4",
            "resamples": "1",
            "seed": "9",
        },
        str(ckpt),
    )
    assert len(epochs) == 2
    assert all(math.isfinite(e["loss"]) for e in epochs)
    assert "auc" in epochs[-1]

    report = hinctr.evaluate(graph, str(ckpt), str(out / "test.tsv"))
    assert report["count"] == 60
    assert 0.0 <= report["auc"] <= 1.0
    assert report["logloss"] > 0.0


def test_metrics():
    assert hinctr.auc([0.1, 0.9], [0, 1]) == 1.0
    assert hinctr.auc([0.5, 0.5], [0, 1]) == 0.5
    assert abs(hinctr.logloss([0.5], [1]) - math.log(2.0)) < 1e-12
    with pytest.raises(hinctr.DataError):
        hinctr.auc([0.1, 0.2], [1, 1])


def test_errors():
    with pytest.raises(hinctr.DataError):
        hinctr.load_graph("/nonexistent", "/nonexistent", "/nonexistent")
