#!/usr/bin/env python3
"""Regenerate the bundled toy corpus under data/.

Two sources: child-directed style utterances (base) and TV-style dialogue
(tv). Utterances range from short repetitive ones to long, varied, heavily
punctuated sentences so the complexity score has something to sort. A few
exact duplicates and very short lines are planted for the filters.

    python3 tools/make_toy_corpus.py [--out data] [--seed 7]
"""

import argparse
import json
import os
import random

SIMPLE = """the a dog cat ball milk mommy daddy baby look see go come here there
up down big little red blue ball car book shoe hat sock more all gone yes no
good nice eat drink play sit run jump hug kiss bath bed sleep night hi bye
want it is my your me you we this that on in""".split()

SIMPLE_FRAMES = [
    "look at the {n} look at the {n}",
    "the {n} the {n}",
    "{v} {v} {v}",
    "more {n} more {n}",
    "where is the {n} where is the {n}",
    "no no no the {n}",
    "you want the {n} you want the {n}",
    "{n} {n} {n} {n}",
    "yes yes the {a} {n} the {a} {n}",
    "bye bye {n} bye bye",
    "night night {n} night night",
    "go go go the {n} go",
]
NOUNS = "dog cat ball milk book shoe hat sock car baby bed bath duck cup".split()
VERBS = "go eat drink play sit run jump hug sleep look".split()
ADJS = "big little red blue good nice".split()

ACADEMIC = """considerable architecture interpretation nevertheless substantial
phenomenon hypothesis infrastructure comprehensive extraordinary
representation simultaneously circumstances approximately characteristic
establishment responsibility environmental investigation philosophical
consequently administration documentation communication opportunity
relationship particularly organization development perspective
significant understanding experimental fundamental mathematical
technological constitutional international observation quantitative
acknowledgement methodology intellectual manufacturing commercial
distribution electromagnetic photosynthesis thermodynamics
archaeological bureaucratic cartographer democratization ecclesiastical
fluorescence geopolitical hierarchical idiosyncratic juxtaposition
kaleidoscope labyrinthine metamorphosis neurological orchestration
paleontology quintessential reconnaissance spectroscopy topological
ubiquitous ventriloquist whimsical xenophobic yesteryear zoological
""".split()

CONNECTIVES = "however, moreover; therefore: although whereas (notably) -- "
SYLLABLES = "ka ri to mu se la vo pen dra qui zel tor fin gal mor est ion ant ure".split()

TV_LINES = [
    "Are you kidding me? That's the third time this week!",
    "Okay, okay. Let's just calm down and talk about it.",
    "I told you already: the keys are on the kitchen table.",
    "Wait... you did what? With the car? Seriously?",
    "Honey, I'm home! Did anyone feed the cat?",
    "We need to get out of here, right now, before they notice.",
    "Nice try, detective. But you'll never find the evidence.",
    "Breaking news tonight: a storm is heading toward the coast.",
]


def pseudo_word(rng):
    return "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(3, 5)))


def simple_line(rng):
    frame = rng.choice(SIMPLE_FRAMES)
    n, v, a = rng.choice(NOUNS), rng.choice(VERBS), rng.choice(ADJS)
    return frame.format(n=n, v=v, a=a)


def middle_line(rng):
    words = [rng.choice(SIMPLE) for _ in range(rng.randint(6, 10))]
    words += [rng.choice(ACADEMIC) for _ in range(rng.randint(1, 3))]
    rng.shuffle(words)
    return " ".join(words) + rng.choice([".", "?", "!"])


def complex_line(rng):
    words = []
    for _ in range(rng.randint(16, 30)):
        r = rng.random()
        if r < 0.5:
            words.append(rng.choice(ACADEMIC))
        elif r < 0.85:
            words.append(pseudo_word(rng))
        else:
            words.append(rng.choice(SIMPLE))
        if rng.random() < 0.15:
            words[-1] += rng.choice([",", ";", ":"])
    if rng.random() < 0.5:
        words.insert(rng.randrange(len(words)), rng.choice(CONNECTIVES.split()))
    return " ".join(words) + "."


def tv_line(rng):
    return rng.choice(TV_LINES) if rng.random() < 0.3 else middle_line(rng)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--lines", type=int, default=5000)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    base = []
    for _ in range(args.lines):
        r = rng.random()
        if r < 0.4:
            base.append(simple_line(rng))
        elif r < 0.7:
            base.append(middle_line(rng))
        else:
            base.append(complex_line(rng))
    # Planted filter cases: short lines, punctuation-heavy lines, duplicates.
    for i in range(0, args.lines, 250):
        base[i] = rng.choice(["hi", "uh oh", "yum!", "oops"])
    for i in range(125, args.lines, 500):
        base[i] = "what?! no!! why?!"
    for i in range(60, args.lines, 400):
        base[i] = base[i - 1]

    tv = [tv_line(rng) for _ in range(args.lines // 5)]

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "toy_corpus.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(base) + "\n")
    with open(os.path.join(args.out, "toy_tv.jsonl"), "w", encoding="utf-8") as f:
        for line in tv:
            f.write(json.dumps({"text": line, "source": "tv"}) + "\n")

    pairs = []
    for _ in range(40):
        n = rng.choice(NOUNS)
        pairs.append({"good": f"look at the {n} look at the {n}",
                      "bad": f"look the at {n} at look the {n}",
                      "phenomenon": "word_order"})
        pairs.append({"good": f"more {n} more {n}",
                      "bad": f"{n} more {n} more more",
                      "phenomenon": "repetition"})
    with open(os.path.join(args.out, "toy_pairs.jsonl"), "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps(p) + "\n")


if __name__ == "__main__":
    main()
