"""Runs `seqcp simulate` + `seqcp detect` for each model and validates the JSON."""

import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    tool, schema_path, work = sys.argv[1], sys.argv[2], pathlib.Path(sys.argv[3])
    work.mkdir(parents=True, exist_ok=True)
    schema = json.loads(pathlib.Path(schema_path).read_text())
    cases = [
        ("logistic", ["--family", "logistic", "-d", "2", "-k", "1"], "logistic", "se"),
        ("poisson", ["--family", "poisson", "-d", "2", "-k", "3"], "poisson", "pelt"),
        ("lasso", ["--family", "lasso", "-d", "10", "-k", "1"], "lasso", "se"),
        ("flat", ["--family", "logistic", "-d", "1", "-k", "0"], "logistic", "dp"),
    ]
    for name, sim_args, model, method in cases:
        csv = work / f"{name}.csv"
        subprocess.run([tool, "simulate", "-T", "120", "--seed", "3", "-o", str(csv), *sim_args], check=True)
        out = subprocess.run([tool, "detect", "-i", str(csv), "-m", model, "--method", method],
                             check=True, capture_output=True, text=True).stdout
        doc = json.loads(out)
        jsonschema.validate(doc, schema)
        segs = doc["segments"]
        assert segs[0]["start"] == 1 and segs[-1]["end"] == doc["T"], name
        assert [s["start"] - 1 for s in segs[1:]] == doc["change_points"], name
        print(f"{name}: ok ({len(doc['change_points'])} change-points)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
