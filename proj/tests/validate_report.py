"""Checks a guided.metrics/1 document against the shipped schema.

usage: validate_report.py SCHEMA GUIDED_BINARY OUTCOMES...
"""
import json
import math
import subprocess
import sys

import jsonschema


def main() -> int:
    schema_path, binary, *outcomes = sys.argv[1:]
    with open(schema_path) as f:
        schema = json.load(f)
    for latency in (True, False):
        args = [binary, "--log-level", "warn", "report", *outcomes, "--format", "json"]
        if not latency:
            args.append("--no-latency")
        doc = json.loads(subprocess.run(args, check=True, capture_output=True, text=True).stdout)
        jsonschema.validate(doc, schema)
        rows = doc["plan"] + doc["types"] + [doc["total"]] + doc["latency"]
        for row in rows:
            assert row["correct"] <= row["total"], row
            want = None if row["total"] == 0 else math.floor((2000 * row["correct"] + row["total"]) // (2 * row["total"])) / 10
            assert row["percentage"] is None or abs(row["percentage"] - want) < 1e-9, row
        print(f"valid ({'with' if latency else 'without'} latency): {len(rows)} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
