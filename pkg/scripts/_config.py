"""Command-line overrides for dataclass experiment configs."""

import argparse
import dataclasses
import json


def parse(cls, argv=None):
    p = argparse.ArgumentParser(description=cls.__doc__)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        kind = type(default)
        if kind in (list, tuple):
            p.add_argument(f"--{f.name.replace('_', '-')}", type=json.loads, default=default, help=f"JSON, default {default}")
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=default, help=f"default {default}")
    return cls(**vars(p.parse_args(argv)))
