#!/usr/bin/env python3
# Copyright 2026 The FILM Simulator Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the bundled toy corpora under data/.

Sentences are drawn from a small template grammar with annotated named
entities. The output is deterministic for a given seed; the committed files
were produced with the defaults below.
"""

import argparse
import random
import re
from pathlib import Path

PERSONS = [
    "Alice Brown", "John Smith", "Maria Lopez", "Kenji Sato", "Laika",
    "Omar Haddad", "Emma Wilson", "Ivan Petrov", "Grace Hopper", "Noah Clark",
    "Sofia Rossi", "David Kim", "Hannah Weber", "Lucas Martin", "Priya Shah",
]
ORGS = [
    "Acme Corp", "Billboard", "Apple", "the Red Cross", "Nordwind Bank",
    "Bluebird Press", "the City Council", "Vertex Labs", "Harbor Rail",
    "the National Museum",
]
PLACES = [
    "Paris", "New Jersey", "Berlin", "Tokyo", "Lisbon", "Cairo", "Oslo",
    "Chicago", "Madrid", "Seoul", "Toronto", "Vienna",
]
YEARS = [str(y) for y in range(1990, 2016)]
ADJS = [
    "small", "old", "quiet", "famous", "bright", "local", "large", "new",
    "private", "early", "senior", "rare",
]
NOUNS = [
    "report", "office", "station", "garden", "museum", "bridge", "festival",
    "library", "market", "factory", "school", "harbor", "studio", "council",
]
ANIMALS = ["cat", "dog", "mouse", "horse", "bird", "fox"]
VERBS_PAST = [
    "visited", "reported", "opened", "closed", "praised", "described",
    "funded", "moved", "built", "sold",
]
MONTHS = ["January", "March", "May", "July", "September", "November"]

TEMPLATES = [
    "{P} moved to {G} in {Y}.",
    "In {Y}, {O} opened a new {N} in {G}.",
    "{P} said that the {N} in {G} was {A}.",
    "The {A} {N} was {V} by {O} in {M}.",
    "{O} {V} the {A} {N} near {G}.",
    "The {X} chases the {X2} near the {N}.",
    "{P} and {P2} {V} the {N} in {Y}.",
    "Officials in {G} {V} the {N}, though not the {N2}.",
    "Did {P} visit the {A} {N} in {G}?",
    "The {N} near the {N2} was {V} in {Y}.",
    "{P} wrote a {A} report about {O}.",
    "Sales at {O} rose in {M} after the {N} opened.",
    "The {A} {X} slept in the {N} of {P}.",
    "In {M} {Y}, {P} joined {O} as a {A} member.",
    "{O} sold the {N} in {G} to {P}!",
]

PUNCT = ".,?!"


def split_words(text):
    out = []
    for word in text.split():
        cur = ""
        for ch in word:
            if ch in PUNCT:
                if cur:
                    out.append(cur)
                    cur = ""
                out.append(ch)
            else:
                cur += ch
        if cur:
            out.append(cur)
    return out


def fill(template, rng):
    slots = {}

    def pick(key, pool, exclude=None):
        choice = rng.choice([p for p in pool if p != exclude])
        slots[key] = choice
        return choice

    pick("P", PERSONS)
    pick("P2", PERSONS, slots["P"])
    pick("O", ORGS)
    pick("G", PLACES)
    pick("Y", YEARS)
    pick("A", ADJS)
    pick("N", NOUNS)
    pick("N2", NOUNS, slots["N"])
    pick("V", VERBS_PAST)
    pick("M", MONTHS)
    pick("X", ANIMALS)
    pick("X2", ANIMALS, slots["X"])

    text = template
    # Mark entities so their token spans survive formatting.
    for key in ("P2", "P", "O", "G"):
        text = text.replace("{" + key + "}", "\x01" + slots[key] + "\x02")
    for key, value in slots.items():
        text = text.replace("{" + key + "}", value)
    # Capitalize a leading lowercase article of an entity (e.g. "the Red Cross").
    if text.startswith("\x01the "):
        text = "\x01The " + text[len("\x01the "):]

    tokens = []
    spans = []
    start = None
    for piece in re.split(r"(\x01|\x02)", text):
        if piece == "\x01":
            start = len(tokens)
        elif piece == "\x02":
            spans.append((start, len(tokens)))
        else:
            tokens.extend(split_words(piece))
    clean = text.replace("\x01", "").replace("\x02", "")
    return clean, spans, tokens


def generate(n, seed):
    rng = random.Random(seed)
    seen = set()
    rows = []
    while len(rows) < n:
        template = rng.choice(TEMPLATES)
        text, spans, tokens = fill(template, rng)
        if text in seen or len(tokens) >= 40:
            continue
        seen.add(text)
        rows.append((text, spans))
    return rows


def write(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for text, _ in rows:
            f.write(text + "\n")
    with open(path.with_suffix(".ents"), "w", encoding="utf-8") as f:
        for _, spans in rows:
            f.write(" ".join(f"{s}:{e}" for s, e in spans) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data")
    parser.add_argument("--seed", type=int, default=20221)
    args = parser.parse_args()
    out = Path(args.out)
    rows = generate(512, args.seed)
    write(out / "toy_512.txt", rows)
    write(out / "toy_256.txt", rows[:256])
    write(out / "toy_32.txt", rows[:32])


if __name__ == "__main__":
    main()
