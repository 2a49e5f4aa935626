import json
import subprocess
import sys

import jsonschema
import pytest

from adelikit.cli import (
    COMMANDS,
    INPUT_SCHEMAS,
    OUTPUT_SCHEMA,
    SCHEMA,
    build_parser,
    corpus_args,
    corpus_dir,
    load_manifest,
    main,
    run_args,
)

MANIFEST = load_manifest()


def run(argv):
    return run_args(build_parser().parse_args(argv), write=False)


def write_job(tmp_path, data, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"schema": SCHEMA, **data}), encoding="utf-8")
    return str(path)


def test_corpus_covers_every_command():
    assert len(MANIFEST) >= 15
    assert set(COMMANDS) <= {job["command"] for job in MANIFEST}


@pytest.mark.parametrize("job", MANIFEST, ids=[j["name"] for j in MANIFEST])
def test_corpus_matches_golden(job):
    golden = (corpus_dir() / "golden" / f"{job['name']}.json").read_text(encoding="utf-8")
    code, text = run(corpus_args(job, 1))
    assert text == golden
    record = json.loads(text)
    jsonschema.validate(record, OUTPUT_SCHEMA)
    assert code == (0 if record["status"] == "ok" else 2)


@pytest.mark.parametrize("job", MANIFEST, ids=[j["name"] for j in MANIFEST])
def test_job_inputs_match_their_schema(job):
    data = json.loads((corpus_dir() / "jobs" / job["input"]).read_text(encoding="utf-8"))
    jsonschema.validate(data, INPUT_SCHEMAS[job["command"]])


def test_module_examples_through_cli(tmp_path):
    job = write_job(tmp_path, {"vars": ["x", "y"], "ideal": ["x-2*y"], "f": "x"})
    code, text = run(["norm", job])
    assert code == 0 and json.loads(text)["result"]["bad"] == ["p:2"]
    job = write_job(tmp_path, {"k": 2, "family": "K3"})
    assert json.loads(run(["threshold", job])[1])["result"]["jump"] == 3


def test_domain_error_exit_code(tmp_path):
    job = write_job(tmp_path, {"connection": {"dim": 1, "entries": [["1", "s^2"]]}, "v0": ["1"]})
    code, text = run(["flat-section", job])
    record = json.loads(text)
    assert code == 2 and record["status"] == "error"
    jsonschema.validate(record, OUTPUT_SCHEMA)


def test_schema_violation_names_path(tmp_path):
    job = write_job(tmp_path, {"k": "three"})
    code, text = run(["threshold", job])
    err = json.loads(text)["error"]
    assert code == 2 and err["kind"] == "SchemaViolation" and err["path"] == "/k"
    job = write_job(tmp_path, {"k": 3, "surprise": 1})
    assert run(["threshold", job])[0] == 2


def test_missing_schema_field(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"k": 3}), encoding="utf-8")
    assert run(["threshold", str(path)])[0] == 2


def test_budget_exit_code(tmp_path):
    job = write_job(
        tmp_path, {"vars": ["x", "y"], "ideal": ["x**2-y"], "f": "x", "oracle": {"deg_bound": 4}}
    )
    code, text = run(["norm", job, "--places", "3", "--budget", "2"])
    assert code == 3 and json.loads(text)["error"]["kind"] == "BudgetExceeded"


def test_unreadable_input(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert run(["threshold", str(path)])[0] == 2


def test_unknown_flag_rejected():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["threshold", "x.json", "--frobnicate"])
    assert exc.value.code == 2


def test_output_file_written_atomically(tmp_path):
    job = write_job(tmp_path, {"k": 3})
    out = tmp_path / "out" / "result.json"
    assert main(["threshold", job, "-o", str(out)]) == 0
    record = json.loads(out.read_text(encoding="utf-8"))
    jsonschema.validate(record, OUTPUT_SCHEMA)
    assert record["result"]["jump"] == 2
    assert [p.name for p in out.parent.iterdir()] == ["result.json"]


def test_threads_do_not_change_output():
    for job in MANIFEST:
        assert run(corpus_args(job, 1))[1] == run(corpus_args(job, 8))[1]


def test_console_entry_point(tmp_path):
    job = write_job(tmp_path, {"k": 3})
    proc = subprocess.run(
        [sys.executable, "-m", "adelikit", "threshold", job], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["jump"] == 2
