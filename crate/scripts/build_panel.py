#!/usr/bin/env python3
"""Build the 2023/24 merged player-gameweek panel CSV.

The per-player gameweek histories published by the vaastav/Fantasy-Premier-League
project are redistributed inside the `airsenal` wheel on PyPI. This script pulls
that wheel (or uses one given with --wheel) and flattens
`player_details_2324.json` into one row per player x fixture, using the column
names of the upstream `merged_gw.csv`.

Usage: python3 scripts/build_panel.py [--wheel PATH] [--out data/merged_gw_2023_24.csv]
"""
import argparse
import csv
import glob
import io
import json
import os
import subprocess
import sys
import tempfile
import zipfile

TEAMS = {
    "ARS": "Arsenal", "AVL": "Aston Villa", "BOU": "Bournemouth", "BRE": "Brentford",
    "BHA": "Brighton", "BUR": "Burnley", "CHE": "Chelsea", "CRY": "Crystal Palace",
    "EVE": "Everton", "FUL": "Fulham", "LIV": "Liverpool", "LUT": "Luton",
    "MCI": "Man City", "MUN": "Man Utd", "NEW": "Newcastle", "NFO": "Nott'm Forest",
    "SHU": "Sheffield Utd", "TOT": "Spurs", "WHU": "West Ham", "WOL": "Wolves",
}

COLUMNS = [
    "name", "position", "team", "element", "GW", "round", "fixture", "kickoff_time",
    "opponent_team", "was_home", "total_points", "value", "minutes", "starts",
    "ict_index", "influence", "creativity", "threat", "expected_goals",
    "expected_assists", "expected_goal_involvements", "expected_goals_conceded",
    "selected", "transfers_balance", "transfers_in", "transfers_out",
    "goals_scored", "assists", "clean_sheets", "goals_conceded", "own_goals",
    "penalties_saved", "penalties_missed", "yellow_cards", "red_cards", "saves",
    "bonus", "bps", "team_h_score", "team_a_score",
]


def fetch_wheel(dest):
    subprocess.check_call(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-d", dest, "airsenal==1.17.0"]
    )
    return glob.glob(os.path.join(dest, "airsenal-*.whl"))[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out", default="data/merged_gw_2023_24.csv")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        with zipfile.ZipFile(wheel) as z:
            details = json.loads(z.read("airsenal/data/player_details_2324.json"))
            fixtures = json.loads(z.read("airsenal/data/fixture_data_2324.json"))
            team_rows = list(csv.DictReader(io.StringIO(z.read("airsenal/data/teams_2324.csv").decode())))

    code_of = {int(t["team_id"]): t["name"] for t in team_rows}
    # (kickoff, home code, away code) -> fixture
    fixture_index = {
        (f["kickoff_time"], code_of[f["team_h"]], code_of[f["team_a"]]): f for f in fixtures
    }

    rows = []
    # Stable element id: rank of the player name in sorted order (names are unique keys upstream).
    for element, name in enumerate(sorted(details), start=1):
        for r in details[name]:
            minutes = int(r["minutes"])
            home = r["was_home"] == "True"
            key = (r["kickoff_time"], r["played_for"], r["opponent"]) if home else (
                r["kickoff_time"], r["opponent"], r["played_for"])
            fx = fixture_index[key]
            rows.append({
                "name": name,
                "position": "GK" if r["position"] == "GKP" else r["position"],
                "team": TEAMS[r["played_for"]],
                "element": element,
                "GW": int(r["gameweek"]),
                "round": int(r["gameweek"]),
                "fixture": fx["id"],
                "kickoff_time": r["kickoff_time"],
                "opponent_team": r["opponent"],
                "was_home": r["was_home"],
                "total_points": int(r["points"]),
                "value": int(r["value"]),
                "minutes": minutes,
                # Upstream starts flag is not redistributed; 60+ minutes is the FPL appearance threshold.
                "starts": 1 if minutes >= 60 else 0,
                "ict_index": r["ict_index"],
                "influence": r["influence"],
                "creativity": r["creativity"],
                "threat": r["threat"],
                "expected_goals": r["expected_goals"],
                "expected_assists": r["expected_assists"],
                "expected_goal_involvements": r["expected_goal_involvements"],
                "expected_goals_conceded": r["expected_goals_conceded"],
                "selected": r["selected"],
                "transfers_balance": r["transfers_balance"],
                "transfers_in": r["transfers_in"],
                "transfers_out": r["transfers_out"],
                "goals_scored": r["goals"],
                "assists": r["assists"],
                "clean_sheets": r["clean_sheets"],
                "goals_conceded": r["conceded"],
                "own_goals": r["own_goals"],
                "penalties_saved": r["penalties_saved"],
                "penalties_missed": r["penalties_missed"],
                "yellow_cards": r["yellow_cards"],
                "red_cards": r["red_cards"],
                "saves": r["saves"],
                "bonus": r["bonus"],
                "bps": r["bps"],
                "team_h_score": fx["team_h_score"],
                "team_a_score": fx["team_a_score"],
            })
    rows.sort(key=lambda r: (r["GW"], r["kickoff_time"], r["element"]))
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(f, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")


if __name__ == "__main__":
    main()
