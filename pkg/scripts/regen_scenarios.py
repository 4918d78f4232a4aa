#!/usr/bin/env python3
"""Regenerate the shipped scenario JSON files in scenarios/."""

from pathlib import Path

from seaplan.scenario import canned_scenario, save_scenario, toy_scenario


def main():
    out = Path(__file__).resolve().parents[1] / "scenarios"
    out.mkdir(exist_ok=True)
    save_scenario(canned_scenario(), out / "canned.json")
    save_scenario(toy_scenario(), out / "toy.json")
    print(f"wrote {out / 'canned.json'} and {out / 'toy.json'}")


if __name__ == "__main__":
    main()
