import json
import math
import os
import subprocess

import numpy as np
import pytest

import roomgroup


def test_room_typing_examples():
    assert roomgroup.classify_room_type(["bathroom"]) == "bathroom"
    assert roomgroup.classify_room_type(["guestroom"], ["indoor"], ["bed"]) == "bedroom"
    assert roomgroup.classify_room_type(["guestroom"], ["indoor"], ["couch", "bed"]) == "bedroom"
    assert roomgroup.classify_room_type(["Property Interior"], ["Indoor"], ["Couch"]) == "living room"
    assert roomgroup.classify_room_type(["guestroom"], ["indoor", "closeup"], ["bed"]) == "other"


def test_metrics_match_hand_values():
    assert roomgroup.adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    assert roomgroup.normalized_ari([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0
    v = roomgroup.v_measure([0, 0, 1, 1], [0, 0, 1, 0])
    assert v["v_measure"] == pytest.approx(0.3437, abs=1e-3)


def test_jacobi_against_numpy():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (9, 9))
    s = (a + a.T) / 2
    values, vectors = roomgroup.jacobi_eigen(s)
    assert np.allclose(values, np.linalg.eigvalsh(s), atol=1e-9)
    assert np.linalg.norm(s - vectors @ np.diag(values) @ vectors.T) <= 1e-8 * np.linalg.norm(s)


def test_laplacian_and_clustering():
    w = np.full((6, 6), 0.02)
    w[:3, :3] = 0.9
    w[3:, 3:] = 0.9
    np.fill_diagonal(w, 1.0)
    lap = roomgroup.normalized_laplacian(w)
    assert np.all(np.linalg.eigvalsh(lap) >= -1e-8)
    out = roomgroup.spectral_cluster(w, 2, ids=list("abcdef"))
    assert sorted(map(sorted, out["groups"])) == [["a", "b", "c"], ["d", "e", "f"]]
    cleaned = roomgroup.remove_noise(w, [["a", "b", "c", "d"]], ids=list("abcdef"))
    assert cleaned["unassigned"] == ["d"]


def test_synthetic_round_trip():
    catalog, truth = roomgroup.generate_property({"bedroom": 3, "bathroom": 1}, 2, 5, 0.0, 7)
    assert len(json.loads(catalog)["images"]) >= 8
    grouping, diagnostics = roomgroup.run_pipeline(catalog, truth_json=truth, predictor="oracle", seed=1)
    report = json.loads(roomgroup.evaluate([grouping], [truth]))
    assert report["overall"]["ari"] == 1.0
    assert report["overall"]["accuracy"] == 1.0
    for line in diagnostics:
        json.loads(line)


def test_errors_carry_the_kind():
    with pytest.raises(roomgroup.RoomgroupError, match="SchemaViolation"):
        roomgroup.run_pipeline("{}", truth_json="{}")
    with pytest.raises(roomgroup.RoomgroupError, match="LengthMismatch"):
        roomgroup.adjusted_rand_index([0, 1], [0, 1, 1])


@pytest.mark.skipif("ROOMGROUP_CLI" not in os.environ, reason="command-line tool not built")
def test_bindings_agree_with_cli(tmp_path):
    cli = os.environ["ROOMGROUP_CLI"]
    subprocess.run([cli, "--seed", "4", "synth", "--rooms", "bedroom=2", "--out", str(tmp_path)],
                   check=True, capture_output=True)
    out = tmp_path / "grouping.json"
    subprocess.run([cli, "--seed", "4", "pipeline", "--backend", "oracle", "--predictor", "none",
                    "--out", str(out), str(tmp_path)], check=True, capture_output=True)
    catalog = (tmp_path / "catalog.json").read_text()
    truth = (tmp_path / "truth.json").read_text()
    grouping, _ = roomgroup.run_pipeline(catalog, truth_json=truth, predictor="none", seed=4)
    assert grouping == out.read_text()
    assert math.isfinite(json.loads(grouping)["room_types"]["bedroom"][0]["mean_internal_score"])
