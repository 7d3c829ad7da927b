#!/usr/bin/env python3
"""Write a small synthetic trips CSV shaped like the Chicago taxi export."""
import csv
import random
import sys
from datetime import datetime, timedelta


def main(path):
    rng = random.Random(7)
    base = datetime(2020, 9, 29, 18, 0, 0)
    rows = []
    for k in range(200):
        if k < 150:
            start = base + timedelta(minutes=rng.randrange(0, 60))
        else:
            start = base + timedelta(minutes=rng.choice([-90, -30, 60, 75, 120]) + rng.randrange(0, 15))
        start = start.replace(minute=start.minute - start.minute % 15)
        pickup = str(rng.choice([8, 8, 8, 32, 32, 28, 6, 76]))
        dropoff = str(rng.randint(1, 77))
        if k % 40 == 39:
            pickup = ""  # missing area, skipped by the reader
        rows.append([f"t{k:04d}", start.strftime("%m/%d/%Y %I:%M:%S %p"), pickup, dropoff,
                     f"{rng.uniform(5, 40):.2f}", "Taxi, Inc." if k % 3 == 0 else "Flash Cab"])
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Trip ID", "Trip Start Timestamp", "Pickup Community Area", "Dropoff Community Area", "Fare",
                    "Company"])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/trips_fixture.csv")
