import math
import os
import subprocess
from pathlib import Path

import pytest

import splitlab

ROOT = Path(__file__).resolve().parents[2]


def test_hyperbolic_basics():
    assert splitlab.hyp_distance(0, 1, 0, 2) == pytest.approx(math.log(2))
    assert splitlab.translation_length(2, 1, 1, 1) == pytest.approx(1.924847300238, abs=1e-9)
    with pytest.raises(splitlab.DomainError):
        splitlab.translation_length(1, 1, 0, 1)


def test_example2_conjugate_point():
    spec = splitlab.MetricSpec.warped(eps=0.1)
    t_star = splitlab.first_conjugate_point(spec, (0, 1, 0), (0, 0, 1), 15.0)
    assert t_star == pytest.approx(7.198, rel=5e-3)
    assert splitlab.first_conjugate_point(splitlab.MetricSpec.product(1.0), (0, 1, 0), (1, 0, 0), 10.0) is None


def test_geodesic_arrays():
    run = splitlab.integrate_geodesic(splitlab.MetricSpec.product(1.0), (0, 1, 0), (1, 0, 0), 2.0, 1e-2)
    assert run["q"].shape == (201, 3)
    assert run["q"][-1, 0] == pytest.approx(math.tanh(2.0), abs=1e-8)
    assert not run["truncated"]


def test_stable_riccati_and_busemann():
    u = splitlab.stable_riccati(splitlab.MetricSpec.product(1.0), (0, 1, 0), (0, 1, 0), 20.0)
    assert u[0, 0] == pytest.approx(-1.0, abs=1e-4)
    assert splitlab.busemann_limit(1.0, 0.3, 2.0, 0.4) == pytest.approx(-0.4, abs=1e-11)


def test_invariants():
    assert splitlab.product_spectrum([0.0], 2 * math.pi, 4.5) == [0.0, 1.0, 1.0, 4.0, 4.0]
    assert splitlab.spectral_gap([0.0, 0.25], 2 * math.pi) == 0.25
    assert splitlab.epsilon0(2.0, math.pi, 1.0) == (1.0, 0.125)
    assert splitlab.moduli_dimension(2) == 7
    assert splitlab.volume_entropy(1.0, 30.0)["fitted"] == pytest.approx(1.0, abs=0.01)
    est, err = splitlab.curvature_deviation(splitlab.MetricSpec.product(1.0), 200)
    assert est == 0.0 and err == 0.0


def test_run_subcommand_in_process(tmp_path):
    cfg = ROOT / "configs" / "moduli_dim.cfg"
    assert splitlab.run_subcommand(["moduli-dim", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "moduli.csv").read_text() == "genus,dimension\n2,7\n"
    assert splitlab.run_subcommand(["nope"]) == 2


@pytest.mark.skipif("SPLITLAB_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary(tmp_path):
    cfg = ROOT / "configs" / "gap_constant.cfg"
    res = subprocess.run([os.environ["SPLITLAB_CLI"], "gap-constant", "--config", str(cfg), "--out", str(tmp_path)])
    assert res.returncode == 0
    assert (tmp_path / "gap_constant.csv").read_text().splitlines()[1] == "2,3.141592653589793,1,1,0.125"
