#!/usr/bin/env python3
"""Runs every sample config through the mgv CLI and validates the trace
lines, summaries, policy table and config files against docs/schemas."""

import argparse
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir):
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        schemas[path.name] = json.loads(path.read_text())
    registry = Registry().with_resources(
        (name, Resource.from_contents(body)) for name, body in schemas.items())
    return schemas, registry


def validator(schemas, registry, name):
    cls = jsonschema.validators.validator_for(schemas[name])
    cls.check_schema(schemas[name])
    return cls(schemas[name], registry=registry)


RUNS = [
    ("flavell", ["--config", "flavell.json"]),
    ("acquire", ["--config", "acquire.json"]),
    ("retrieve", ["--config", "retrieve.json"]),
    ("bandit", ["--arms", "bandit.json", "--episodes", "60"]),
    ("plan", ["--tree", "tree.json"]),
    ("solve-recall", ["--config", "recall.json", "--episodes", "40"]),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mgv", required=True)
    ap.add_argument("--configs", required=True, type=pathlib.Path)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--work", required=True, type=pathlib.Path)
    args = ap.parse_args()

    shutil.rmtree(args.work, ignore_errors=True)
    args.work.mkdir(parents=True)
    schemas, registry = load_registry(args.schemas)
    record = validator(schemas, registry, "trace_record.schema.json")
    summary = validator(schemas, registry, "summary.schema.json")
    policy = validator(schemas, registry, "policy.schema.json")
    config = validator(schemas, registry, "run_config.schema.json")
    bare = {"bandit": validator(schemas, registry, "bandit_params.schema.json"),
            "plan": validator(schemas, registry, "tree.schema.json")}
    error = validator(schemas, registry, "error.schema.json")

    failures = 0

    def check(v, instance, where):
        nonlocal failures
        errs = sorted(v.iter_errors(instance), key=lambda e: list(e.path))
        for e in errs[:3]:
            print(f"{where}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errs)

    for sub, flags in RUNS:
        cfg_path = args.configs / flags[1]
        doc = json.loads(cfg_path.read_text())
        check(bare[sub] if sub in bare else config, doc, cfg_path.name)

        trace = args.work / f"{sub}.jsonl"
        cmd = [args.mgv, sub, flags[0], str(cfg_path), *flags[2:], "--seed", "5", "--repeat", "2",
               "--out", str(trace)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{sub}: exit {proc.returncode}: {proc.stdout}{proc.stderr}")
            failures += 1
            continue
        json.loads(proc.stdout.strip().splitlines()[-1])
        lines = trace.read_text().splitlines()
        if not lines:
            print(f"{sub}: empty trace")
            failures += 1
        for i, line in enumerate(lines):
            check(record, json.loads(line), f"{trace.name}:{i + 1}")
        check(summary, json.loads(trace.with_suffix(".summary.json").read_text()), f"{sub} summary")

        if sub == "solve-recall":
            check(policy, json.loads((args.work / "solve-recall.policy.json").read_text()), "policy")
            rows = (args.work / "solve-recall.threshold.csv").read_text().splitlines()
            if rows[0] != "t,z_threshold":
                print(f"threshold csv header: {rows[0]!r}")
                failures += 1

    bad = args.work / "bad.json"
    bad.write_text(json.dumps({"mode": "retrieve", "seed": 1,
                               "params": {"query": ["x"], "satisficing_rate": -1}}))
    proc = subprocess.run([args.mgv, "retrieve", "--config", str(bad)], capture_output=True, text=True)
    check(error, json.loads(proc.stdout), "error line")

    print("schema check", "failed" if failures else "passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
