"""End-to-end tests for the command-line interface.

Commands run in process through main(argv); reports are read back from
stdout or the --out file.
"""

import dataclasses
import hashlib
import json

import pytest

from edgedrop.cli import main, parse_report
from edgedrop.codes import load_code, relay_instance, save_code, tabulate
from edgedrop.library import butterfly, butterfly4
from edgedrop.network import load_instance, save_instance


def _write_pair(tmp_path, inst, code, stem="net"):
    inst_path = str(tmp_path / f"{stem}.instance.json")
    code_path = str(tmp_path / f"{stem}.code.json")
    save_instance(inst, inst_path)
    save_code(code, code_path)
    return inst_path, code_path


def _stdout_report(capsys):
    return json.loads(capsys.readouterr().out)


def test_validate_exit_codes(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, _ = _write_pair(tmp_path, inst, code)
    assert main(["validate", inst_path]) == 0
    assert _stdout_report(capsys)["result"]["problems"] == []

    broken = dataclasses.replace(inst, nodes=inst.nodes[:-1])
    broken_path = str(tmp_path / "broken.instance.json")
    save_instance(broken, broken_path)
    assert main(["validate", broken_path]) == 1
    assert _stdout_report(capsys)["result"]["problems"]

    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["bogus"]) == 2
    assert main(["verify"]) == 2
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    assert main(["verify", inst_path, code_path, "--rates", "1,1", "--eps", "abc"]) == 2
    capsys.readouterr()


def test_verify_exit_codes_and_rates_grammar(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    # Plain integers are bits per use; one bit per binary source holds.
    assert main(["verify", inst_path, code_path, "--rates", "1,1"]) == 0
    report = _stdout_report(capsys)
    assert report["result"]["feasibility"]["verdict"] is True
    assert report["result"]["feasibility"]["target_cardinalities"] == [2, 2]

    # Two bits per source needs cardinality four and fails.
    assert main(["verify", inst_path, code_path, "--rates", "2,2"]) == 1
    report = _stdout_report(capsys)
    assert report["result"]["feasibility"]["rate_ok"] == [False, False]

    inst4, code4 = butterfly4()
    inst4_path, code4_path = _write_pair(tmp_path, inst4, code4, stem="wide")
    assert main(["verify", inst4_path, code4_path, "--rates", "2,2"]) == 0
    # The # prefix gives the cardinality directly.
    assert main(["verify", inst4_path, code4_path, "--rates", "#4,#4"]) == 0
    capsys.readouterr()


def test_verify_eps_is_echoed_verbatim(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    assert main(
        ["verify", inst_path, code_path, "--rates", "1,1", "--eps", "1/4"]
    ) == 0
    report = _stdout_report(capsys)
    assert "1/4" in report["command"]
    assert report["result"]["feasibility"]["target_eps"] == "1/4"


def test_report_roundtrip_digests_and_echo(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    out_path = tmp_path / "report.json"
    status = main(
        [
            "verify",
            inst_path,
            code_path,
            "--rates",
            "1,1",
            "--out",
            str(out_path),
            "--workers",
            "2",
        ]
    )
    capsys.readouterr()
    assert status == 0
    payload = out_path.read_bytes()
    report = parse_report(payload)
    # Tuning flags are stripped from the echo.
    assert "--out" not in report.command
    assert "--workers" not in report.command
    assert report.command[:3] == ("verify", inst_path, code_path)
    for path in (inst_path, code_path):
        digest = "sha256:" + hashlib.sha256(open(path, "rb").read()).hexdigest()
        assert report.inputs[path] == digest


def test_reports_byte_identical_across_workers(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    outs = []
    for workers in ("1", "4"):
        out_path = tmp_path / f"report-{workers}.json"
        argv = [
            "remove-edge",
            inst_path,
            code_path,
            "--edge",
            "bottleneck",
            "--partition",
            "builtin:cwl",
            "--out",
            str(out_path),
            "--workers",
            workers,
        ]
        assert main(argv) == 0
        outs.append(out_path.read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_remove_edge_builtin_cwl_emits_files(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    prefix = str(tmp_path / "restricted")
    argv = [
        "remove-edge",
        inst_path,
        code_path,
        "--edge",
        "bottleneck",
        "--partition",
        "builtin:cwl",
        "--emit",
        prefix,
    ]
    assert main(argv) == 0
    report = _stdout_report(capsys)
    assert report["result"]["route"] == "cwl"
    assert report["result"]["found"] is True
    cert = report["result"]["certificate"]
    assert cert["feasibility"]["verdict"] is True
    assert cert["achieved_cardinalities"] == [1, 1]

    emitted = load_instance(prefix + ".instance.json")
    assert len(emitted.edges) == len(inst.edges) - 1
    assert all(e.id != "bottleneck" for e in emitted.edges)
    load_code(prefix + ".code.json")


def test_remove_edge_cwl_route_gates_on_error(tmp_path, capsys):
    inst, code = relay_instance([2, 2], 2, tabulate([2, 2], lambda a, b: a ^ b))
    rows = list(code.decoders["t"])
    rows[0] = (1, 1)
    corrupted = dataclasses.replace(code, decoders={"t": tuple(rows)})
    inst_path, code_path = _write_pair(tmp_path, inst, corrupted)
    argv = [
        "remove-edge",
        inst_path,
        code_path,
        "--edge",
        "e",
        "--partition",
        "builtin:cwl",
    ]
    assert main(argv) == 1
    report = _stdout_report(capsys)
    assert report["result"]["found"] is False
    assert "error exceeds" in report["result"]["reason"]


def test_remove_edge_partition_file_routes(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)

    singles = tmp_path / "singles.json"
    singles.write_text(json.dumps({"labels": [0, 1, 2, 3]}))
    argv = [
        "remove-edge",
        inst_path,
        code_path,
        "--edge",
        "bottleneck",
        "--partition",
        str(singles),
    ]
    assert main(argv) == 0
    report = _stdout_report(capsys)
    assert report["result"]["route"] == "partition"
    assert report["result"]["conditions"] == {
        "determines_edge": True,
        "parts_are_products": True,
    }
    assert report["result"]["certificate"]["feasibility"]["verdict"] is True

    # Grouping by the first source leaves the XOR varying inside a part.
    byfirst = tmp_path / "byfirst.json"
    byfirst.write_text(json.dumps({"labels": [0, 0, 1, 1]}))
    argv[-1] = str(byfirst)
    assert main(argv) == 1
    report = _stdout_report(capsys)
    assert report["result"]["found"] is False
    assert report["result"]["conditions"]["determines_edge"] is False


def test_remove_edge_edge_value_route(tmp_path, capsys):
    inst, code = relay_instance([4, 3], 2, tabulate([4, 3], lambda a, b: a % 2))
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    argv = [
        "remove-edge",
        inst_path,
        code_path,
        "--edge",
        "e",
        "--partition",
        "builtin:edge-value",
    ]
    assert main(argv) == 0
    report = _stdout_report(capsys)
    assert report["result"]["route"] == "edge-value"
    assert report["result"]["certificate"]["achieved_cardinalities"] == [2, 3]

    # XOR fibers are not products, so the butterfly refuses this route.
    binst, bcode = butterfly()
    binst_path, bcode_path = _write_pair(tmp_path, binst, bcode, stem="bf")
    argv2 = [
        "remove-edge",
        binst_path,
        bcode_path,
        "--edge",
        "bottleneck",
        "--partition",
        "builtin:edge-value",
    ]
    assert main(argv2) == 1
    assert _stdout_report(capsys)["result"]["found"] is False

    assert main(argv + ["--eps", "1/4"]) == 2
    capsys.readouterr()


def test_cwl_check_with_and_without_groups_file(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    assert main(["cwl-check", inst_path, code_path, "--edge", "bottleneck"]) == 0
    report = _stdout_report(capsys)
    assert report["result"]["witness"]["hom"] == [0, 1, 1, 0]
    assert report["result"]["witness"]["edge_support"] == [0, 1]

    groups = tmp_path / "groups.json"
    groups.write_text(
        json.dumps(
            {
                "sources": [
                    {"kind": "cyclic", "order": 2},
                    {"kind": "cyclic", "order": 2},
                ],
                "edge": {"kind": "cyclic", "order": 2},
                "edge_support": [0, 1],
            }
        )
    )
    argv = [
        "cwl-check",
        inst_path,
        code_path,
        "--edge",
        "bottleneck",
        "--groups",
        str(groups),
    ]
    assert main(argv) == 0
    capsys.readouterr()

    mismatched = tmp_path / "mismatched.json"
    mismatched.write_text(
        json.dumps({"sources": [{"kind": "cyclic", "order": 3}]})
    )
    argv[-1] = str(mismatched)
    assert main(argv) == 2
    capsys.readouterr()


def test_cwl_search_rewrite_and_budget(tmp_path, capsys):
    # The AND relay needs the full-information rewrite before any group law
    # fits its bottleneck column.
    inst, code = relay_instance([2, 2], 4, tabulate([2, 2], lambda a, b: a & b))
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    assert main(["cwl-search", inst_path, code_path, "--edge", "e"]) == 0
    report = _stdout_report(capsys)
    assert report["result"]["rewritten"] is True
    assert "rewritten_code" in report["result"]

    argv = ["cwl-search", inst_path, code_path, "--edge", "e", "--rewrites", "0"]
    assert main(argv) == 1
    assert _stdout_report(capsys)["result"]["found"] is False


def test_group_remove_and_zero_error(tmp_path, capsys):
    spec_path = tmp_path / "klein.json"
    spec_path.write_text(
        json.dumps(
            {
                "group": {
                    "kind": "product",
                    "factors": [
                        {"kind": "cyclic", "order": 2},
                        {"kind": "cyclic", "order": 2},
                    ],
                },
                "subgroups": {"s1": [0, 1], "s2": [0, 2], "e": [0, 3]},
            }
        )
    )
    argv = ["group-remove", str(spec_path), "--edge", "e", "--sources", "s1,s2"]
    assert main(argv) == 0
    report = _stdout_report(capsys)
    assert all(report["result"]["checks"].values())
    assert report["result"]["auxiliary_order"] == 1
    assert report["result"]["certificate"]["feasibility"]["verdict"] is True

    argv = ["group-zero-error", str(spec_path), "--demand", "s1:s1"]
    assert main(argv) == 0
    report = _stdout_report(capsys)
    assert report["result"]["decisions"][0]["kind"] == "zero_error"

    argv = ["group-zero-error", str(spec_path), "--demand", "e:s1", "--demand", "s1:s1"]
    assert main(argv) == 1
    report = _stdout_report(capsys)
    kinds = [d["kind"] for d in report["result"]["decisions"]]
    assert kinds == ["high_error", "zero_error"]
    assert report["result"]["decisions"][0]["min_error"] == "1/2"

    argv = ["group-zero-error", str(spec_path), "--demand", "no-colon"]
    assert main(argv) == 2
    capsys.readouterr()


def test_case_study_butterfly_with_emit(tmp_path, capsys):
    prefix = str(tmp_path / "case")
    assert main(["case-study", "butterfly", "--emit", prefix]) == 0
    report = _stdout_report(capsys)
    names = [r["name"] for r in report["result"]["runs"]]
    assert names == ["binary", "wide"]
    binary, wide = report["result"]["runs"]
    assert binary["certificate"]["achieved_cardinalities"] == [1, 1]
    assert wide["certificate"]["achieved_cardinalities"] == [2, 2]
    for name in names:
        load_instance(f"{prefix}.{name}.instance.json")
        load_code(f"{prefix}.{name}.code.json")
        restricted = load_instance(f"{prefix}.{name}.restricted.instance.json")
        assert all(e.id != "bottleneck" for e in restricted.edges)


def test_case_study_identity_checks(capsys):
    assert main(["case-study", "n2"]) == 0
    assert main(["case-study", "n2", "--assignment", "2,2"]) == 0
    assert main(["case-study", "n3-injectivity", "--grid"]) == 0
    capsys.readouterr()
    assert main(["case-study", "dougherty", "--alphabet", "4", "--search"]) == 0
    report = _stdout_report(capsys)
    assert report["result"]["dougherty"]["discovered"] == [[0, 1, 3, 2], [0, 2, 1, 3]]
    assert main(["case-study", "dougherty", "--alphabet", "2", "--search"]) == 1
    assert main(["case-study", "dougherty", "--alphabet", "4", "--t", "0,1,3,2"]) == 0
    assert main(["case-study", "dougherty", "--alphabet", "4"]) == 2
    capsys.readouterr()


def test_csv_format(tmp_path, capsys):
    inst, code = butterfly()
    inst_path, code_path = _write_pair(tmp_path, inst, code)
    assert main(["validate", inst_path, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("edge_id,")

    argv = [
        "remove-edge",
        inst_path,
        code_path,
        "--edge",
        "bottleneck",
        "--partition",
        "builtin:cwl",
        "--format",
        "csv",
    ]
    assert main(argv) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert "bottleneck" in lines[1]
    assert "True" in lines[1]
