import pytest

from app.cli import REPRODUCES, SUBCOMMANDS, build_parser, load_config_file, main
from app.core.exceptions import ValidationError


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def header_of(path):
    return dict(
        line[2:].split("=", 1)
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.startswith("# ")
    )


class TestPower:
    def test_prints_and_writes_delta(self, out_dir, capsys):
        out = out_dir / "power.csv"
        assert main(["power", "--out", str(out)]) == 0
        assert "10240" in capsys.readouterr().out
        assert "delta,10240" in out.read_text(encoding="utf-8").splitlines()

    def test_n_beams_sets_antenna_count(self, out_dir):
        out = out_dir / "power.csv"
        assert main(["power", "--n-beams", "128", "--out", str(out)]) == 0
        assert "delta,20480" in out.read_text(encoding="utf-8").splitlines()
        assert header_of(out)["n_antennas"] == "128"


SMALL_CONFIGS = {
    "pattern": "points = 256\n",
    "synthesize": "points = 256\n",
    "aoa": "trials = 50\nsnr_list = 0,10\ngrid_size = 256\n",
    "search": "n_beams = 16\nsnr_db = 10\ntrials = 5\n",
    "squint": "points = 256\nfreq_points = 16\n",
    "jcas-apg": "time_units = 50\npoints = 64\n",
    "jcas-tradeoff": "time_units = 30\n",
    "jcas-secrecy": "time_units = 10\npoints = 64\n",
    "bh": "symbols = 200\nsnr_list = 10,20\n",
    "power": "",
}


class TestReproducibility:
    @pytest.mark.parametrize("name", sorted(SUBCOMMANDS))
    def test_every_subcommand_is_byte_identical(self, name, out_dir):
        config = write_config(out_dir / "run.conf", SMALL_CONFIGS[name])
        outputs = {}
        for run in ("a", "b"):
            run_dir = out_dir / run
            args = [name, "--seed", "11", "--config", str(config), "--out", str(run_dir / f"{name}.csv")]
            assert main(args) == 0
            outputs[run] = {p.name: p.read_bytes() for p in sorted(run_dir.iterdir())}
        assert outputs["a"]
        assert outputs["a"] == outputs["b"]

    def test_jcas_apg_is_byte_identical(self, out_dir):
        config = write_config(out_dir / "apg.conf", "points = 64\n")
        for name in ("a", "b"):
            args = ["jcas-apg", "--time-units", "50", "--config", str(config), "--out", str(out_dir / f"{name}.csv")]
            assert main(args) == 0
        for scheme in ("type1", "type2"):
            first = (out_dir / f"a_{scheme}.csv").read_bytes()
            second = (out_dir / f"b_{scheme}.csv").read_bytes()
            assert first == second

    def test_noisy_search_depends_only_on_seed(self, out_dir):
        config = write_config(out_dir / "search.conf", "# small run\ntrials = 5\n")
        runs = {}
        for name, seed in (("a", "7"), ("b", "7"), ("c", "8")):
            out = out_dir / f"{name}.csv"
            args = ["search", "--n-beams", "16", "--snr-db", "10", "--seed", seed,
                    "--config", str(config), "--out", str(out)]
            assert main(args) == 0
            runs[name] = out.read_bytes()
        assert runs["a"] == runs["b"]
        assert runs["a"] != runs["c"]

    def test_header_records_seed_and_parameters(self, out_dir):
        out = out_dir / "pattern.csv"
        assert main(["pattern", "--n-beams", "8", "--seed", "99", "--out", str(out)]) == 0
        header = header_of(out)
        assert header["seed"] == "99"
        assert header["n_beams"] == "8"
        assert header["subcommand"] == "pattern"
        assert (out_dir / "pattern_features.csv").exists()


class TestExperiments:
    def test_squint_writes_three_files(self, out_dir):
        config = write_config(out_dir / "squint.conf", "points = 256\nfreq_points = 16\n")
        out = out_dir / "squint.csv"
        assert main(["squint", "--config", str(config), "--out", str(out)]) == 0
        for path in (out, out_dir / "squint_regions.csv", out_dir / "squint_profiles.csv"):
            assert path.exists()

    def test_bh_codebook(self, out_dir):
        config = write_config(out_dir / "bh.conf", "symbols = 500\nsnr_list = 10,20\n")
        out = out_dir / "bh.csv"
        assert main(["bh", "--config", str(config), "--out", str(out)]) == 0
        codebook = (out_dir / "bh_codebook.csv").read_text(encoding="utf-8").splitlines()
        assert codebook[-5].startswith("word,")
        assert [line.split(",")[2] for line in codebook[-4:]] == ["2+6", "2", "2+6+11", "6"]

    def test_jcas_tradeoff_reports_one_crossing(self, out_dir, capsys):
        out = out_dir / "tradeoff.csv"
        assert main(["jcas-tradeoff", "--time-units", "30", "--out", str(out)]) == 0
        assert "crossings: 1" in capsys.readouterr().out
        assert header_of(out)["crossings"] == "1"



class TestErrors:
    def test_unknown_subcommand(self):
        assert main(["nonexistent"]) == 2

    def test_non_numeric_flag(self):
        assert main(["power", "--n-beams", "abc"]) == 2

    def test_negative_seed(self):
        assert main(["power", "--seed", "-1"]) == 2

    def test_invalid_parameter_value(self, out_dir, capsys):
        args = ["jcas-apg", "--x-sensing", "20", "--out", str(out_dir / "x.csv")]
        assert main(args) == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_typed_config_value(self, out_dir):
        config = write_config(out_dir / "bh.conf", "symbols = many\n")
        assert main(["bh", "--config", str(config), "--out", str(out_dir / "bh.csv")]) == 2

    def test_unknown_config_key(self, out_dir, capsys):
        config = write_config(out_dir / "apg.conf", "time_unit = 10000\n")
        out = out_dir / "apg.csv"
        assert main(["jcas-apg", "--config", str(config), "--out", str(out)]) == 2
        assert "time_unit" in capsys.readouterr().err
        assert not out.exists()

    def test_flag_not_used_by_subcommand(self, out_dir):
        assert main(["power", "--rho", "0.9", "--out", str(out_dir / "p.csv")]) == 2

    def test_malformed_config_line(self, out_dir):
        config = write_config(out_dir / "bad.conf", "points 64\n")
        assert main(["pattern", "--config", str(config), "--out", str(out_dir / "p.csv")]) == 2

    def test_missing_config_file(self, out_dir):
        assert main(["pattern", "--config", str(out_dir / "missing.conf")]) == 1

    def test_unwritable_output(self, out_dir):
        blocker = out_dir / "blocker"
        blocker.write_text("", encoding="utf-8")
        assert main(["power", "--out", str(blocker / "power.csv")]) == 1


class TestParser:
    @pytest.mark.parametrize("name", sorted(SUBCOMMANDS))
    def test_help(self, name, capsys):
        assert main([name, "--help"]) == 0
        out = capsys.readouterr().out
        assert SUBCOMMANDS[name].split()[0] in out
        assert "reproduces:" in out
        assert REPRODUCES[name].split()[0] in out

    def test_flags_override_config(self, out_dir):
        config = write_config(out_dir / "p.conf", "n_beams = 8\nseed = 5\n")
        args = build_parser().parse_args(["pattern", "--config", str(config), "--n-beams", "16"])
        assert args.n_beams == 16
        out = out_dir / "p.csv"
        assert main(["pattern", "--config", str(config), "--n-beams", "16", "--out", str(out)]) == 0
        header = header_of(out)
        assert header["n_beams"] == "16"
        assert header["seed"] == "5"

    def test_config_keys_normalized(self, out_dir):
        config = write_config(out_dir / "k.conf", "time-units = 10  # comment\n\n")
        assert load_config_file(config) == {"time_units": "10"}

    def test_config_missing_key(self, out_dir):
        config = write_config(out_dir / "k.conf", "= 10\n")
        with pytest.raises(ValidationError):
            load_config_file(config)
