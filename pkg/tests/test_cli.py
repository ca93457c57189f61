import subprocess
import sys

import pytest

from binstretch.cli import TABLE, main, table_rows
from binstretch.core import GameOutcome

SMALL = ["--cache-bits", "16"]


def test_search_exit_codes(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["search", "-m", "3", "-S", "19", "-T", "14", "--emit-tree", str(out)] + SMALL) == 0
    assert "adversary wins" in capsys.readouterr().out
    assert out.exists()
    assert main(["search", "--bins", "3", "--stretched", "22", "--opt", "16"] + SMALL) == 1
    assert "algorithm wins" in capsys.readouterr().out


def test_verify_and_export(tmp_path, capsys):
    tree = tmp_path / "t.json"
    main(["search", "-m", "3", "-S", "19", "-T", "14", "--emit-tree", str(tree)] + SMALL)
    capsys.readouterr()
    report = tmp_path / "r.txt"
    assert main(["verify", str(tree), "-m", "3", "-S", "19", "-T", "14",
                 "--report", str(report)]) == 0
    assert "accepted" in report.read_text()
    assert main(["verify", str(tree), "-m", "3", "-S", "20", "-T", "14"]) == 1
    dot = tmp_path / "t.dot"
    assert main(["export", str(tree), "--compact", "-o", str(dot)]) == 0
    assert dot.read_text().startswith("digraph")


def test_missing_file_is_error(tmp_path):
    assert main(["verify", str(tmp_path / "missing.json"), "-m", "3", "-S", "19", "-T", "14"]) == 2


def test_malformed_tree_is_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert main(["verify", str(bad), "-m", "3", "-S", "19", "-T", "14"]) == 2


def test_usage_errors():
    assert main(["search", "-m", "3"]) == 2
    assert main(["search", "-m", "3", "-S", "14", "-T", "14"]) == 2
    assert main([]) == 2


def test_timeout_exits_2(capsys):
    code = main(["search", "-m", "3", "-S", "45", "-T", "33", "--timeout", "0.5"] + SMALL)
    assert code == 2
    assert "indeterminate" in capsys.readouterr().out


def test_simulate_modes(tmp_path, capsys):
    assert main(["simulate", "-k", "1", "--adversary", "random", "--sequences", "50"]) == 0
    seq = tmp_path / "items.txt"
    seq.write_text("7\n9 # j then w\n16\n")
    assert main(["simulate", "--adversary", "file", "--file", str(seq), "--trace"]) == 0
    out = capsys.readouterr().out
    assert "1: item 7" in out and "overpacks=0" in out
    seq.write_text("16 16 16 16\n")
    assert main(["simulate", "--adversary", "file", "--file", str(seq)]) == 2


def test_table_filters():
    fast = table_rows("fast")
    assert [(r.stretched, r.opt) for r in fast][:3] == [(19, 14), (22, 16), (26, 19)]
    slow = {(r.bins, r.stretched, r.opt) for r in table_rows("slow")}
    assert {(3, 34, 25), (3, 45, 33), (4, 19, 14)} <= slow
    overnight = {(r.bins, r.stretched, r.opt) for r in table_rows("overnight")}
    assert (5, 19, 14) in overnight and len(overnight) == len(TABLE)
    adversary = [(r.bins, r.stretched, r.opt) for r in TABLE
                 if r.expected is GameOutcome.ADVERSARY_WINS]
    assert adversary == [(3, 19, 14), (3, 34, 25), (3, 45, 33), (4, 19, 14), (5, 19, 14)]


def test_output_is_deterministic(tmp_path):
    cmd = [sys.executable, "-m", "binstretch", "search", "-m", "3", "-S", "19", "-T", "14",
           "--stats", "--hash-seed", "0x1234"] + SMALL
    first = subprocess.run(cmd, capture_output=True, text=True)
    second = subprocess.run(cmd, capture_output=True, text=True)
    assert first.returncode == 0
    assert first.stdout == second.stdout
    assert "time=" in first.stderr and "time=" not in first.stdout


@pytest.mark.parametrize("flag", ["--version", "--help"])
def test_info_flags(flag):
    assert main([flag]) == 0
