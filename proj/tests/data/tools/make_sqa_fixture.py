"""Writes the bundled SQA-format fixture and its manifest.

The manifest counts are tallied here while the rows are generated, so the
loader test compares against numbers that do not come from the loader.
"""
import csv
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "sqa_fixture")
rng = random.Random(20190611)

TABLES = {
    "table_csv/medals.csv": (
        ["Rank", "Nation", "Gold", "Silver", "Bronze", "Total"],
        [["1", "Australia", "2", "1", "0", "3"], ["2", "Italy", "1", "1", "1", "3"],
         ["3", "Germany", "1", "0", "1", "2"], ["4", "Soviet Union", "1", "0", "0", "1"],
         ["5", "Switzerland", "0", "2", "1", "3"], ["6", "United States", "0", "1", "0", "1"],
         ["7", "Great Britain", "0", "0", "1", "1"], ["7", "France", "0", "0", "1", "1"]]),
    "table_csv/buildings.csv": (
        ["Building", "City", "Floors", "Completed"],
        [["Tower A", "Toronto", "72", "1976"], ["First Canadian Place", "Toronto", "72", "1975"],
         ["Scotia Plaza", "Toronto", "68", "1988"], ["Place Ville Marie", "Montreal", "47", "1962"],
         ["Bow, The", "Calgary", "58", "2012"]]),
    "table_csv/events.csv": (
        ["Event", "Winner", "Date"],
        [["Men's 100m", "Carl Lewis", "August 4 1984"], ["Women's 200m", "Valerie Brisco", "August 8 1984"],
         ["Men's 400m", "Alonzo Babers", "August 8 1984"], ["Marathon", "Carlos Lopes", "August 12 1984"]]),
    "table_csv/riders.csv": (
        ["Rider", "Team", "Wins", "Active"],
        [["Carl Fogarty", "Ducati", "59", "1992-2000"], ["Troy Bayliss", "Ducati", "52", "1997-2008"],
         ["Colin Edwards", "Honda", "31", "1995-2002"], ["Carl Fogarty", "Honda", "0", "1991"]]),
}


def coords_field(cells, style):
    if style == 0:
        return "[" + ", ".join("'(%d, %d)'" % c for c in cells) + "]"
    if style == 1:
        return "[" + ",".join('"(%d,%d)"' % c for c in cells) + " ]"
    return "[" + ", ".join("(%d, %d)" % c for c in cells) + "]"


def text_field(texts):
    parts = []
    for t in texts:
        parts.append('"%s"' % t if "'" in t else "'%s'" % t)
    return "[" + ", ".join(parts) + "]"


def main():
    os.makedirs(os.path.join(OUT, "table_csv"), exist_ok=True)
    for path, (header, rows) in TABLES.items():
        with open(os.path.join(OUT, path), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    lines = []
    stats = dict(input_rows=0, accepted_rows=0, rejected_rows=0, sequences=0, questions=0,
                 non_rectangular=0, text_mismatch=0, empty_answers=0, rejected_sequences=0)

    def emit(seq, ann, pos, q, table, cells, texts):
        lines.append("\t".join([seq, str(ann), str(pos), q, table, coords_field(cells, rng.randrange(3)),
                                text_field(texts)]))
        stats["input_rows"] += 1

    questions = {
        "table_csv/medals.csv": ["what are all the nations?", "which won gold medals?", "which won more than one?"],
        "table_csv/buildings.csv": ["list the buildings", "which have more than 60 floors", "which of those are in toronto"],
        "table_csv/events.csv": ["what events were held?", "which were on august 8 1984?", "who won them?"],
        "table_csv/riders.csv": ["who are the riders?", "which rode for ducati?", "how many wins did they have?"],
    }
    tables = list(TABLES)
    seq_no = 0
    # 13 clean three-turn sequences = 39 rows.
    while seq_no < 13:
        table = tables[seq_no % len(tables)]
        header, rows = TABLES[table]
        seq = "nt-%d" % (100 + seq_no)
        ann = seq_no % 3
        for pos in range(3):
            col = (1 if table.endswith("medals.csv") else 0) if pos < 2 else rng.randrange(len(header))
            picked = sorted(rng.sample(range(len(rows)), rng.randint(1, len(rows))))
            cells = [(r, col) for r in picked]
            texts = [rows[r][col] for r in picked]
            emit(seq, ann, pos, questions[table][pos], table, cells, texts)
        stats["accepted_rows"] += 3
        stats["questions"] += 3
        stats["sequences"] += 1
        seq_no += 1

    # Non-rectangular gold: (0,0) and (1,1) without (0,1), (1,0).
    emit("nt-200", 0, 0, "which two cells?", "table_csv/medals.csv", [(0, 0), (1, 1)], ["1", "Italy"])
    stats.update(accepted_rows=stats["accepted_rows"] + 1, questions=stats["questions"] + 1,
                 sequences=stats["sequences"] + 1, non_rectangular=stats["non_rectangular"] + 1)
    # answer_text disagrees with the table content.
    emit("nt-201", 1, 0, "who won the most?", "table_csv/riders.csv", [(0, 0)], ["Carl Foggy"])
    stats.update(accepted_rows=stats["accepted_rows"] + 1, questions=stats["questions"] + 1,
                 sequences=stats["sequences"] + 1, text_mismatch=stats["text_mismatch"] + 1)
    # Empty answer list.
    emit("nt-202", 0, 0, "which won ten golds?", "table_csv/medals.csv", [], [])
    stats.update(accepted_rows=stats["accepted_rows"] + 1, questions=stats["questions"] + 1,
                 sequences=stats["sequences"] + 1, empty_answers=stats["empty_answers"] + 1)
    # Missing table file.
    emit("nt-203", 0, 0, "what is here?", "table_csv/missing.csv", [(0, 0)], ["x"])
    stats["rejected_rows"] += 1
    # Unparseable coordinates.
    lines.append("\t".join(["nt-204", "0", "0", "which one?", "table_csv/medals.csv", "['(a, 1)']", "['x']"]))
    stats["input_rows"] += 1
    stats["rejected_rows"] += 1
    # Out-of-range coordinate.
    emit("nt-205", 0, 0, "which row?", "table_csv/buildings.csv", [(9, 0)], ["?"])
    stats["rejected_rows"] += 1
    # Positions 0 and 2: the whole sequence is rejected.
    emit("nt-206", 2, 0, "list the events", "table_csv/events.csv", [(0, 0)], ["Men's 100m"])
    emit("nt-206", 2, 2, "and the winners", "table_csv/events.csv", [(0, 1)], ["Carl Lewis"])
    stats["rejected_rows"] += 2
    stats["rejected_sequences"] += 1
    # Rows out of order within a sequence still load once sorted by position.
    emit("nt-207", 1, 1, "which of those are from canada?", "table_csv/buildings.csv", [(0, 0), (1, 0)],
         ["Tower A", "First Canadian Place"])
    emit("nt-207", 1, 0, "list every building", "table_csv/buildings.csv", [(r, 0) for r in range(5)],
         [TABLES["table_csv/buildings.csv"][1][r][0] for r in range(5)])
    stats.update(accepted_rows=stats["accepted_rows"] + 2, questions=stats["questions"] + 2,
                 sequences=stats["sequences"] + 1)
    # Wrong field count.
    lines.append("nt-208\t0\t0\ttoo few fields")
    stats["input_rows"] += 1
    stats["rejected_rows"] += 1

    assert stats["input_rows"] == 50, stats
    assert stats["accepted_rows"] + stats["rejected_rows"] == stats["input_rows"]
    with open(os.path.join(OUT, "fixture.tsv"), "w") as f:
        f.write("id\tannotator\tposition\tquestion\ttable_file\tanswer_coordinates\tanswer_text\n")
        f.write("\n".join(lines) + "\n")
    with open(os.path.join(OUT, "manifest.json"), "w") as f:
        json.dump(stats, f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
