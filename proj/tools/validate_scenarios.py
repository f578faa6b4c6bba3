#!/usr/bin/env python3
"""Check scenario files against docs/scenario.schema.json."""

import json
import re
import sys
from pathlib import Path

import jsonschema
import yaml


class Loader(yaml.SafeLoader):
    pass


# YAML 1.2 floats: PyYAML otherwise reads 1.0e6 as a string.
Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(\.[0-9]+|[0-9]+(\.[0-9]*)?)([eE][-+]?[0-9]+)?$|^[-+]?\.(inf|Inf|INF)$|^\.(nan|NaN|NAN)$"),
    list("-+0123456789."),
)


def main(argv):
    root = Path(__file__).resolve().parent.parent
    schema = json.loads((root / "docs" / "scenario.schema.json").read_text())
    files = [Path(a) for a in argv[1:]] or sorted((root / "scenarios").glob("*.scenario"))
    bad = 0
    for f in files:
        try:
            jsonschema.validate(yaml.load(f.read_text(), Loader=Loader), schema)
            print(f"ok   {f.name}")
        except jsonschema.ValidationError as e:
            bad += 1
            print(f"FAIL {f.name}: {'/'.join(map(str, e.absolute_path))}: {e.message}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
