import shutil
import warnings
from pathlib import Path

import pytest

from alfven_plots.cli import main
from alfven_plots.figures import MissingColumns, PlotSpec, render_run

HERE = Path(__file__).parent
GOLDEN = HERE / "golden_run"
FAILED = HERE / "failed_run"
EMPTY = HERE / "empty_run"


def test_golden_run_emits_all_figures(tmp_path):
    code = main(["--run", str(GOLDEN), "--out", str(tmp_path)])
    assert code == 0
    for name in ("norms.png", "decay.png", "conserved.png"):
        assert (tmp_path / name).exists(), name
    # one-sided golden run carries no sweep constants: no scaling figure
    assert not (tmp_path / "scaling.png").exists()


def test_svg_output(tmp_path):
    code = main(["--run", str(GOLDEN), "--out", str(tmp_path), "--format", "svg"])
    assert code == 0
    assert (tmp_path / "norms.svg").exists()


def test_refuses_failed_manifest_without_force(tmp_path):
    code = main(["--run", str(FAILED), "--out", str(tmp_path)])
    assert code == 4
    assert not list(tmp_path.glob("*.png"))


def test_force_overrides_failed_manifest(tmp_path):
    code = main(["--run", str(FAILED), "--out", str(tmp_path), "--force"])
    assert code == 0
    assert (tmp_path / "norms.png").exists()


def test_header_only_csv_warns_and_emits_empty_axes(tmp_path):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        code = main(["--run", str(EMPTY), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "norms.png").exists()
    assert any("no rows" in str(w.message) for w in caught)


def test_missing_columns_is_an_error(tmp_path):
    run = tmp_path / "run"
    run.mkdir()
    shutil.copy(GOLDEN / "manifest.json", run / "manifest.json")
    (run / "norms.csv").write_text("t,E_plus\n0.0,1.0\n")
    code = main(["--run", str(run), "--out", str(tmp_path)])
    assert code == 3


def test_missing_run_dir_is_an_error(tmp_path):
    code = main(["--run", str(tmp_path / "nowhere"), "--out", str(tmp_path)])
    assert code == 2


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        PlotSpec(run_dir=GOLDEN, out_dir=tmp_path, fmt="pdf")


def test_flat_energy_curve_for_one_sided_run(tmp_path):
    # transport invariance of the weighted norm: E_plus stays flat on the
    # golden one-sided run; read back the CSV the way the figures do
    from alfven_plots.figures import load_norms

    _, data = load_norms(GOLDEN)
    ep = data["E_plus"]
    assert ep.size > 2
    assert abs(ep.max() - ep.min()) <= 1e-6 * ep[0]

    spec = PlotSpec(run_dir=GOLDEN, out_dir=tmp_path, figures=["norms"])
    written = render_run(spec)
    assert written and written[0].exists()
