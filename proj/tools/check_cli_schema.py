#!/usr/bin/env python3
"""Run every cma subcommand in JSON mode and validate its output against docs/cli-output.schema.json."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
DATA = ROOT / "data"

CASES = [
    ("validate", 0, ["validate", "-m", "wheel:3"]),
    ("validate", 1, ["validate", "-m", "wheel:10001"]),
    ("validate", 0, ["validate", "-c", str(DATA / "nested_wheels.json")]),
    ("simulate_machine", 0, ["simulate", "-m", "wire:01", "--input", "1 0 1"]),
    ("simulate_cluster", 0, ["simulate", "-c", str(DATA / "nested_wheels.json"), "--ticks", "1000"]),
    ("occupancy", 0, ["occupancy", "-m", "wheel:2,loops=a", "--mode", "path-count", "--steps", "40"]),
    ("occupancy", 0, ["occupancy", "-m", "wheel:2,loops=a", "--mode", "stationary"]),
    ("occupancy", 0, ["occupancy", "-m", "wheel:2,loops=a", "--mode", "mc", "--steps", "1000", "--seed", "1"]),
    ("occupancy", 0, ["occupancy", "-m", str(DATA / "labeled_wheel.json"), "--mode", "cycle", "--by-signal"]),
    ("approx_dist", 0, ["approx-dist", "--probs", "0.5,0.3,0.2", "--labels", "x,y,z"]),
    ("sync_word", 0, ["sync-word", "-m", "wire:xy"]),
    ("sync_word", 0, ["sync-word", "-m", "wheel:3"]),
    ("classify", 0, ["classify", "-m", "chain:5"]),
    ("classify", 0, ["classify", "-m", "chain:5", "--open-start", "--open-end"]),
    ("classify", 0, ["classify", "--product", "wheel:3", "chain:4,loops=d"]),
    ("cycle_length", 0, ["cycle-length", "-c", str(DATA / "nested_wheels.json")]),
    ("bisim", 0, ["bisim", "wheel:4", "wheel:2"]),
    ("tape", 0, ["tape", "--script", str(DATA / "write_pattern.tape"), "--idle", "16"]),
    ("fluent_eval", 0, ["fluent", "eval", "-f", str(DATA / "day.json"), "--fluent", "Night", "--at", "2.0",
                        "--mode", "preponderant", "--scales", "naive"]),
    ("fluent_schema", 0, ["fluent", "schema", "--schema", "exchange"]),
    ("parse", 0, ["parse", "--lexicon", str(DATA / "grammar.json"), "--sentence", "Eleanor broke the record"]),
    ("parse", 0, ["parse", "--sentence", "the record the record"]),
    ("activate", 0, ["activate", "--net", str(DATA / "grief.json"), "--inject", "die(y)", "--inject", "y"]),
    ("error", 1, ["occupancy", "-m", "wheel:0", "--mode", "cycle"]),
    ("error", 1, ["approx-dist", "--probs", "0.5,0.2500001,0.2499999", "--eps", "1e-9"]),
    ("error", 1, ["classify", "-m", "akt:activity"]),
]


def main() -> int:
    cma = sys.argv[1]
    schema = json.loads((ROOT / "docs" / "cli-output.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        cases = CASES + [("export_dot", 0, ["export-dot", "-m", "synapse:rab", "--out", str(pathlib.Path(tmp) / "s.dot")])]
        for definition, code, args in cases:
            proc = subprocess.run([cma, "--format", "json", *args], capture_output=True, text=True, timeout=60)
            label = " ".join(args)
            try:
                if proc.returncode != code:
                    raise ValueError(f"exit {proc.returncode}, expected {code}: {proc.stderr.strip()}")
                doc = json.loads(proc.stdout)
                jsonschema.validate(doc, {**schema, "$ref": f"#/$defs/{definition}"})
                jsonschema.validate(doc, schema)
                if json.loads(json.dumps(doc)) != doc:
                    raise ValueError("output does not round-trip")
            except (ValueError, jsonschema.ValidationError) as err:
                failures += 1
                print(f"FAIL {label}: {err}")
                continue
            print(f"ok   {label}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
