"""Turn the output of classify.g into the two classification files.

Each input line is ``level index genus count entries...``.  Labels are the
level, a letter block and the genus; within a level and genus the records are
ordered by index and then by the order GAP produced them.

    python3 tools/gap_to_classification.py /tmp/cls52.txt src/galois_index/data/classification
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from galois_index.congruence import CongruenceRecord, format_records  # noqa: E402


def letters(k):
    s = ""
    k += 1
    while k:
        k, r = divmod(k - 1, 26)
        s = chr(65 + r) + s
    return s


def main(src, dst):
    rows = []
    for i, line in enumerate(Path(src).read_text().split("\n")):
        f = line.split()
        if not f:
            continue
        level, index, genus, count = map(int, f[:4])
        ents = list(map(int, f[4:]))
        gens = tuple(tuple(ents[4 * k:4 * k + 4]) for k in range(count))
        rows.append((genus, level, index, i, gens))
    out = {0: [CongruenceRecord("1A0", 1, 1, 0, ())], 1: []}
    rows.sort()
    seen = {}
    for genus, level, index, _, gens in rows:
        k = seen.get((genus, level), 0)
        seen[(genus, level)] = k + 1
        out[genus].append(CongruenceRecord(f"{level}{letters(k)}{genus}", level, index, genus, gens))
    d = Path(dst)
    d.mkdir(parents=True, exist_ok=True)
    for g in (0, 1):
        (d / f"genus{g}.txt").write_text(format_records(out[g], g))
        print(f"genus {g}: {len(out[g])} records")


if __name__ == "__main__":
    main(*sys.argv[1:])
