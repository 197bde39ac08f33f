"""
명령줄 인터페이스 테스트
"""
import json

import pytest

from main import EXIT_AUDIT, EXIT_DATA_ERROR, EXIT_OK, EXIT_USAGE, build_parser, build_suite, main
from src.models.report import ReportRow
from src.models.settings import Settings


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def two_step_file(tmp_path):
    path = tmp_path / "two_step.json"
    path.write_text(json.dumps({
        "num_agents": 2,
        "items": [{"supply": 1, "values": [1, 1]}, {"supply": 1, "values": [0, 1]}],
    }), encoding="utf-8")
    return path


class TestGen:
    def test_hard_instance(self, capsys, tmp_path):
        output = tmp_path / "hard.json"
        code, out, _ = _run(capsys, ["gen", "--family", "hard-table2", "--n", "3", "-o", str(output)])
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["balance_ratio"] == pytest.approx(91.0)
        assert json.loads(output.read_text(encoding="utf-8"))["num_agents"] == 3

    def test_missing_parameter(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["gen", "--family", "hard-table2", "-o", str(tmp_path / "x.json")])
        assert code == EXIT_USAGE

    def test_unknown_subcommand(self, capsys):
        code, _, _ = _run(capsys, ["solve"])
        assert code == EXIT_USAGE


class TestRun:
    def test_myopic(self, capsys, two_step_file, tmp_path):
        allocation = tmp_path / "alloc.csv"
        code, out, _ = _run(capsys, ["run", str(two_step_file), "--alg", "myopic", "--audit",
                                     "--allocation-out", str(allocation)])
        assert code == EXIT_OK
        row = json.loads(out)
        assert row["algorithm_nw"] == pytest.approx(0.8660, abs=1e-4)
        assert row["status"] == "ok"
        assert allocation.exists()

    def test_lambda_below_one(self, capsys, two_step_file):
        code, _, _ = _run(capsys, ["run", str(two_step_file), "--alg", "half-and-half", "--lambda", "0.5"])
        assert code == EXIT_USAGE

    def test_guessed_needs_seed(self, capsys, two_step_file):
        code, _, _ = _run(capsys, ["run", str(two_step_file), "--alg", "rounded-guessed"])
        assert code == EXIT_USAGE

    def test_seeded_runs_repeat(self, capsys, two_step_file, tmp_path):
        rows = []
        for index in range(2):
            report = tmp_path / f"report{index}.csv"
            code, out, _ = _run(capsys, ["run", str(two_step_file), "--alg", "rounded-guessed", "--seed", "1",
                                         "--report-out", str(report)])
            assert code == EXIT_OK
            row = json.loads(out)
            row.pop("wall_time_s")
            rows.append(row)
        assert rows[0] == rows[1]

    def test_broken_file(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("[1, 2", encoding="utf-8")
        code, _, _ = _run(capsys, ["run", str(path), "--alg", "myopic"])
        assert code == EXIT_DATA_ERROR

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["run", str(tmp_path / "absent.json"), "--alg", "myopic"])
        assert code == EXIT_DATA_ERROR


class TestRatios:
    def test_hard_instance(self, capsys, tmp_path):
        output = tmp_path / "hard.json"
        _run(capsys, ["gen", "--family", "hard-table2", "--n", "3", "-o", str(output)])
        code, out, _ = _run(capsys, ["ratios", str(output)])
        assert code == EXIT_OK
        payload = json.loads(out)
        assert payload["balance_ratio"] == pytest.approx(91.0)
        assert payload["impartiality_ratio"] == pytest.approx(81.0, rel=1e-4)
        assert payload["impartiality_fw_gap"] <= 1e-7

    def test_zero_agent(self, capsys, tmp_path):
        path = tmp_path / "zero.json"
        path.write_text(json.dumps({"num_agents": 2, "items": [{"supply": 1, "values": [1, 0]}]}),
                        encoding="utf-8")
        code, _, err = _run(capsys, ["ratios", str(path)])
        assert code == EXIT_DATA_ERROR
        assert "[1]" in err


class TestBench:
    def test_empty_suite_writes_header(self, capsys, tmp_path):
        output = tmp_path / "bench.csv"
        code, _, _ = _run(capsys, ["bench", "--families", "", "-o", str(output)])
        assert code == EXIT_OK
        assert output.read_text(encoding="utf-8") == ",".join(ReportRow.columns()) + "\n"

    def test_small_suite(self, capsys, tmp_path):
        output = tmp_path / "bench.csv"
        code, _, _ = _run(capsys, ["bench", "--families", "hard-table2", "--hard-n", "3",
                                   "--algorithms", "myopic,rounded-guessed", "--seeds", "0",
                                   "--enumerate-k", "0..2", "-o", str(output)])
        assert code == EXIT_OK
        lines = output.read_text(encoding="utf-8").splitlines()
        # myopic 1행 + rounded-guessed (실행 1, k 3, 혼합 1, 기대 하한 1)
        assert len(lines) == 1 + 1 + 6

    def test_copies_of_hard_instance(self, capsys, tmp_path):
        output = tmp_path / "bench.csv"
        code, _, _ = _run(capsys, ["bench", "--families", "copies", "--base-family", "hard-table2",
                                   "--hard-n", "3", "--copies", "1,2", "--algorithms", "myopic",
                                   "-o", str(output)])
        assert code == EXIT_OK
        lines = output.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        assert all(",copies,n=3;copies=" in line and ",lower," in line for line in lines[1:])

    def test_enumerate_k_defaults_to_setting(self):
        args = build_parser().parse_args(["bench", "--families", "hard-table2", "--enumerate-k", "-o", "x.csv"])
        assert build_suite(args, Settings(enumerate_k_max=3)).enumerate_k == 3
        args = build_parser().parse_args(["bench", "--families", "hard-table2", "-o", "x.csv"])
        assert build_suite(args, Settings(enumerate_k_max=3)).enumerate_k is None
        args = build_parser().parse_args(["bench", "--families", "hard-table2", "--enumerate-k", "0..2",
                                          "-o", "x.csv"])
        assert build_suite(args, Settings(enumerate_k_max=3)).enumerate_k == 2

    def test_copies_rejects_nested_base(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["bench", "--families", "copies", "--base-family", "copies",
                                   "-o", str(tmp_path / "bench.csv")])
        assert code == EXIT_USAGE

    def test_unknown_algorithm(self, capsys, tmp_path):
        code, _, _ = _run(capsys, ["bench", "--families", "hard-table2", "--algorithms", "magic",
                                   "-o", str(tmp_path / "bench.csv")])
        assert code == EXIT_USAGE


def test_audit_failure_exit_code(capsys, two_step_file, monkeypatch):
    import main as cli
    from src.core.exceptions import AuditViolationError

    def failing_audit(trace, settings=None, check_anticipation=False):
        raise AuditViolationError("gain_inequality", "주입된 위반")

    monkeypatch.setattr(cli, "audit_trace", failing_audit)
    code, _, err = _run(capsys, ["run", str(two_step_file), "--alg", "myopic", "--audit"])
    assert code == EXIT_AUDIT
    assert "gain_inequality" in err
