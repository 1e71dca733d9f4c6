import json

import pytest

from bernstein_lp import cli
from bernstein_lp.reports import ParameterError, ResourceLimitError


def run_main(args, tmp_path, name="report.json"):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


class TestRegistry:
    def test_contains_main_ids(self):
        ids = [c["id"] for c in cli.list_checks()]
        assert "thm1.1" in ids and "lem6.4" in ids
        assert len(ids) == len(set(ids))

    def test_one_owner_each(self):
        modules = {"catalog", "kernels", "spectral", "parabolic", "spde", "simulate"}
        for c in cli.list_checks():
            assert c["module"] in modules

    def test_checks_verb(self, capsys):
        assert cli.main(["checks"]) == 0
        assert {"id", "module", "description"} <= set(json.loads(capsys.readouterr().out)[0])


class TestVerbs:
    def test_catalog_check_stable(self, tmp_path):
        code, rep = run_main(["catalog", "check", "stable", "--param", "alpha=1.0"], tmp_path)
        assert code == 0 and rep["pass"]
        exps = next(c for c in rep["checks"] if c["inequality_id"] == "lem3.1")["exponents"]
        for key in ("delta1", "delta2", "delta3"):
            assert exps[key] == pytest.approx(0.5, abs=1e-3)

    def test_lp_ratio_single_mode(self, tmp_path):
        code, rep = run_main(["lp-ratio", "--p", "2", "--single-mode"], tmp_path)
        assert code == 0
        assert rep["checks"][0]["ratio"] == pytest.approx(0.5, rel=0.02)

    def test_oversized_grid(self, tmp_path, capsys):
        code, rep = run_main(["kernel", "--d", "3", "--n", str(2 ** 20)], tmp_path)
        assert code == 2 and rep is None
        assert json.loads(capsys.readouterr().err)["error"] == "ResourceLimitError"

    def test_unknown_phi(self, tmp_path):
        assert run_main(["catalog", "--phi", "nope"], tmp_path)[0] == 2

    def test_envelope_fields(self, tmp_path):
        _, rep = run_main(["catalog", "list"], tmp_path)
        assert {"schema_version", "config", "checks", "metrics", "pass"} <= set(rep)
        assert len(rep["artifacts"]["entries"]) == 8


class TestConfig:
    def test_file_with_flag_override(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"phi": "two_power", "n": 32, "M": 16}))
        args = cli._parser().parse_args(["lp-ratio", "--config", str(cfg_path), "--n", "64"])
        cfg = cli.config_from_args(args)
        assert (cfg.phi, cfg.n, cfg.M) == ("two_power", 64, 16)

    def test_unknown_key(self):
        with pytest.raises(ParameterError):
            cli.RunConfig.from_dict({"grid_size": 8})

    @pytest.mark.parametrize("change", [{"n": 48}, {"band": 40}, {"ps": [0.5]}, {"command": "plot"}])
    def test_validation(self, change):
        with pytest.raises(ParameterError):
            cli.RunConfig(**change).validate()

    def test_replica_cap(self):
        with pytest.raises(ResourceLimitError):
            cli.RunConfig(replicas=10, max_replicas=20).validate()


class TestContract:
    def test_failing_check_exits_one(self, tmp_path, monkeypatch):
        monkeypatch.setitem(cli.DISPATCH, "catalog",
                            lambda cfg: ([cli._check("lem3.1", False)], {}))
        code, rep = run_main(["catalog"], tmp_path)
        assert code == 1 and rep["pass"] is False

    def test_replay_is_bit_exact(self):
        cfg = cli.RunConfig(command="spde", phi="two_power", n=16, M=16, replicas=200, K=2)
        first = cli.run(cfg)
        replay = cli.run(cli.RunConfig.from_dict(first["config"]))
        assert replay["checks"] == first["checks"]
