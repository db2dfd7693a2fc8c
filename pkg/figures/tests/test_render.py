import hashlib
import shutil
from pathlib import Path

import pytest

from gqrc_figures.cli import main
from gqrc_figures.render import load_rows, render
from gqrc_figures.schemas import FIGURE_SCHEMAS, SchemaError

DATA = Path(__file__).parent / "data"
ALL_FIGS = sorted(FIGURE_SCHEMAS)


def test_sample_data_exists_for_every_figure_id():
    for fig_id in ALL_FIGS:
        assert (DATA / f"{fig_id}.csv").exists(), fig_id


@pytest.mark.parametrize("fig_id", ALL_FIGS)
def test_render_every_figure_id(fig_id, tmp_path):
    out = render(fig_id, [DATA / f"{fig_id}.csv"], tmp_path / f"{fig_id}.png")
    assert out.exists() and out.stat().st_size > 5000


@pytest.mark.parametrize("suffix", [".png", ".svg"])
def test_render_formats(suffix, tmp_path):
    out = render("fig2a", [DATA / "fig2a.csv"], tmp_path / f"panel{suffix}")
    assert out.exists() and out.stat().st_size > 0


def test_render_is_read_only_and_repeatable(tmp_path):
    src = DATA / "fig3b.csv"
    before = src.read_bytes()
    out1 = render("fig3b", [src], tmp_path / "a.png")
    out2 = render("fig3b", [src], tmp_path / "b.png")
    assert src.read_bytes() == before
    digest = lambda p: hashlib.sha256(p.read_bytes()).hexdigest()
    assert digest(out1) == digest(out2)


def test_multiple_csv_inputs_concatenate(tmp_path):
    out = render("fig3c", [DATA / "fig3c.csv", DATA / "snr.csv"], tmp_path / "c.png")
    assert out.exists()


def test_missing_column_named_in_error(tmp_path):
    broken = tmp_path / "broken.csv"
    lines = (DATA / "fig2a.csv").read_text().splitlines()
    header = lines[0].split(",")
    drop = header.index("capacity_stderr")
    rows = [",".join(v for i, v in enumerate(line.split(",")) if i != drop)
            for line in lines]
    broken.write_text("\n".join(rows) + "\n")
    with pytest.raises(SchemaError, match="capacity_stderr"):
        load_rows("fig2a", [broken])


def test_wrong_schema_for_figure_id():
    with pytest.raises(SchemaError, match="snr_db_mean"):
        load_rows("fig3b", [DATA / "fig2a.csv"])
    with pytest.raises(SchemaError, match="unknown figure id"):
        load_rows("fig7", [DATA / "fig2a.csv"])


def test_cli_success_and_schema_exit_codes(tmp_path, capsys):
    out = tmp_path / "fig5.png"
    assert main(["--fig", "fig5", "--csv", str(DATA / "fig5.csv"),
                 "--out", str(out)]) == 0
    assert out.exists()

    code = main(["--fig", "fig5", "--csv", str(DATA / "fig2a.csv"),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2
    err = capsys.readouterr().err
    assert "snr_db_mean" in err  # diagnostics name the missing column

    assert main(["--fig", "fig2a", "--csv", str(DATA / "fig2a.csv"),
                 "--out", str(tmp_path / "bad.pdf")]) == 2
