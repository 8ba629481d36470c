import csv
import os
from typing import Iterable, Sequence


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    n = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])
            n += 1
    return n
