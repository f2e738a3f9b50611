#!/usr/bin/env python3
"""Regenerates the bundled data files.

Writes a synthetic annotated micro-corpus (POS tags, lemmas, entity labels and
dependency trees from a small phrase grammar), two example
specifications, and masked-entity relation episodes for the few-shot harness.

    python3 scripts/make_fixtures.py [--out data] [--sentences 3000] [--seed 7]

The held-out generated items are produced by the CLI from the corpus:

    ruleforge gen-data --corpus data/corpus.jsonl --n 200 --seed 2024 \
        --out /dev/null --items data/heldout_items.jsonl
"""

import argparse
import json
import os
import random

DETS = ["the", "a", "this", "every", "that"]
ADJS = ["big", "small", "old", "young", "red", "quiet", "famous", "local", "new", "tall", "busy", "green"]
INTENS = ["very", "quite", "really"]
NOUNS = [
    ("dog", "dogs"), ("cat", "cats"), ("man", "men"), ("woman", "women"), ("company", "companies"),
    ("city", "cities"), ("car", "cars"), ("book", "books"), ("house", "houses"), ("team", "teams"),
    ("son", "sons"), ("daughter", "daughters"), ("student", "students"), ("teacher", "teachers"),
    ("river", "rivers"), ("museum", "museums"), ("bird", "birds"), ("letter", "letters"),
    ("child", "children"), ("report", "reports"), ("friend", "friends"), ("garden", "gardens"),
]
# lemma, past, 3rd person present
INTRANS = [
    ("bark", "barked", "barks"), ("run", "ran", "runs"), ("sleep", "slept", "sleeps"),
    ("arrive", "arrived", "arrives"), ("laugh", "laughed", "laughs"), ("wait", "waited", "waits"),
    ("sing", "sang", "sings"), ("work", "worked", "works"), ("fall", "fell", "falls"),
]
TRANS = [
    ("found", "founded", "founds"), ("join", "joined", "joins"), ("buy", "bought", "buys"),
    ("see", "saw", "sees"), ("visit", "visited", "visits"), ("build", "built", "builds"),
    ("read", "read", "reads"), ("write", "wrote", "writes"), ("like", "liked", "likes"),
    ("meet", "met", "meets"), ("lead", "led", "leads"), ("sell", "sold", "sells"),
    ("leave", "left", "leaves"), ("find", "found", "finds"),
]
ADVS = ["quickly", "slowly", "often", "again", "loudly", "happily"]
PREPS = ["in", "of", "with", "near", "from", "at", "for"]
FIRST = ["John", "Mary", "David", "Sarah", "Peter", "Anna", "James", "Laura", "Paul", "Emma", "Mark", "Julia"]
INITIALS = ["M", "J", "K", "R"]
LAST = ["Anderson", "Smith", "Brown", "Miller", "Wilson", "Taylor", "Clark", "Lewis", "Young", "Walker"]
ORGS = [["Acme", "Corp"], ["Google"], ["United", "Nations"], ["Globex"], ["Initech"], ["Red", "Cross"], ["Umbrella", "Inc"]]
LOCS = [["Paris"], ["London"], ["New", "York"], ["Berlin"], ["Tokyo"], ["Rome"], ["Lagos"], ["Lima"]]
YEARS = ["1990", "1999", "2001", "2010", "2015", "1984"]
PRONOUNS = [("He", "he"), ("She", "she")]


class Builder:
    """Accumulates tokens and (head, dependent, label) arcs."""

    def __init__(self):
        self.tokens = []
        self.deps = []

    def add(self, word, lemma, tag, entity="O"):
        self.tokens.append({"word": word, "lemma": lemma, "tag": tag, "entity": entity})
        return len(self.tokens) - 1

    def arc(self, head, dep, label):
        self.deps.append([head, dep, label])

    def record(self, sid):
        return {"id": sid, "tokens": self.tokens, "deps": self.deps}


def name_np(b, rng):
    kind = rng.random()
    if kind < 0.45:
        parts = [rng.choice(FIRST)]
        if rng.random() < 0.3:
            parts.append(rng.choice(INITIALS))
        if rng.random() < 0.6:
            parts.append(rng.choice(LAST))
        ent = "PERSON"
    elif kind < 0.7:
        parts, ent = rng.choice(ORGS), "ORGANIZATION"
    elif kind < 0.9:
        parts, ent = rng.choice(LOCS), "LOCATION"
    else:
        w, l = rng.choice(PRONOUNS)
        return b.add(w, l, "PRP", "PERSON")
    idx = [b.add(p, p.lower(), "NNP", ent) for p in parts]
    for i in idx[:-1]:
        b.arc(idx[-1], i, "compound")
    return idx[-1]


def common_np(b, rng, depth):
    mods = []
    plural = rng.random() < 0.25
    if not plural or rng.random() < 0.4:
        d = rng.choice(DETS)
        mods.append((b.add(d, d, "DT"), "det"))
    for _ in range(rng.choices([0, 1, 2, 3], [0.45, 0.35, 0.15, 0.05])[0]):
        if rng.random() < 0.15:
            reps = 2 if rng.random() < 0.3 else 1
            ints = [b.add(i, i, "RB") for i in [rng.choice(INTENS)] * reps]
        else:
            ints = []
        a = rng.choice(ADJS)
        ai = b.add(a, a, "JJ")
        for i in ints:
            b.arc(ai, i, "advmod")
        mods.append((ai, "amod"))
    sing, plur = rng.choice(NOUNS)
    head = b.add(plur if plural else sing, sing, "NNS" if plural else "NN")
    for i, label in mods:
        b.arc(head, i, label)
    if depth < 2 and rng.random() < 0.2:
        prep_phrase(b, rng, head, depth + 1)
    return head


def noun_phrase(b, rng, depth=0):
    head = name_np(b, rng) if rng.random() < 0.45 else common_np(b, rng, depth)
    if depth == 0 and rng.random() < 0.08:
        cc = b.add("and", "and", "CC")
        other = name_np(b, rng) if rng.random() < 0.5 else common_np(b, rng, depth + 1)
        b.arc(head, cc, "cc")
        b.arc(head, other, "conj")
    return head


def prep_phrase(b, rng, head, depth):
    p = rng.choice(PREPS)
    pi = b.add(p, p, "IN")
    b.arc(head, pi, "prep")
    if rng.random() < 0.15:
        y = rng.choice(YEARS)
        b.arc(pi, b.add(y, y, "CD", "DATE"), "pobj")
    else:
        b.arc(pi, noun_phrase(b, rng, depth + 1), "pobj")


def sentence(rng, sid):
    b = Builder()
    fronted = None
    if rng.random() < 0.1:
        y = rng.choice(YEARS)
        fi = b.add("In", "in", "IN")
        b.arc(fi, b.add(y, y, "CD", "DATE"), "pobj")
        fronted = (fi, b.add(",", ",", ","))
    subj = noun_phrase(b, rng)
    shape = rng.random()
    past = rng.random() < 0.65
    if shape < 0.3:
        lemma, pst, prs = rng.choice(INTRANS)
        root = b.add(pst if past else prs, lemma, "VBD" if past else "VBZ")
        b.arc(root, subj, "nsubj")
        if rng.random() < 0.35:
            a = rng.choice(ADVS)
            b.arc(root, b.add(a, a, "RB"), "advmod")
    elif shape < 0.8:
        lemma, pst, prs = rng.choice(TRANS)
        root = b.add(pst if past else prs, lemma, "VBD" if past else "VBZ")
        b.arc(root, subj, "nsubj")
        b.arc(root, noun_phrase(b, rng), "dobj")
    else:
        cop = b.add("was" if past else "is", "be", "VBD" if past else "VBZ")
        root = common_np(b, rng, 2)
        b.arc(root, subj, "nsubj")
        b.arc(root, cop, "cop")
        p = b.add("of", "of", "IN")
        b.arc(root, p, "prep")
        b.arc(p, noun_phrase(b, rng, 1), "pobj")
    if rng.random() < 0.3:
        prep_phrase(b, rng, root, 1)
    if fronted:
        b.arc(root, fronted[0], "prep")
        b.arc(root, fronted[1], "punct")
    b.arc(root, b.add(".", ".", "."), "punct")
    return b.record(sid)


def fixed(sid, tokens, arcs):
    b = Builder()
    for t in tokens.split():
        w, l, tag, e = t.split("/")
        b.add(w, l, tag, e)
    for h, d, label in arcs:
        b.arc(h, d, label)
    return b.record(sid)


ANDERSON = fixed(
    "anderson",
    "He/he/PRP/PERSON was/be/VBD/O a/a/DT/O son/son/NN/O of/of/IN/O David/david/NNP/PERSON "
    "and/and/CC/O Mary/mary/NNP/PERSON M/m/NNP/PERSON Anderson/anderson/NNP/PERSON ./././O",
    [(3, 0, "nsubj"), (3, 1, "cop"), (3, 2, "det"), (5, 4, "case"), (3, 5, "nmod"), (9, 6, "cc"),
     (9, 7, "compound"), (9, 8, "compound"), (3, 9, "conj"), (3, 10, "punct")],
)
DOG = fixed("dog", "the/the/DT/O dog/dog/NN/O barked/bark/VBD/O ./././O",
            [(1, 0, "det"), (2, 1, "nsubj"), (2, 3, "punct")])
RUNS = fixed("runs", "A/a/DT/O dog/dog/NN/O runs/run/VBZ/O ./././O",
             [(1, 0, "det"), (2, 1, "nsubj"), (2, 3, "punct")])


def anderson_specs():
    surface = {"mode": "surface", "entries": [{"sentence": {"ref": "anderson"}, "selections": [[0, 10]]}]}
    path_sentence = {
        "id": "anderson#path",
        "tokens": [ANDERSON["tokens"][i] for i in (0, 3, 9)],
        "deps": [],
    }
    path = {"mode": "path", "entries": [{"sentence": path_sentence, "selections": [[0, 3]]}]}
    return surface, path


# label -> (subject type, middle tokens as word/lemma/tag, object type, middle arcs)
# Each relation has one middle word of its own, so episodes are separable.
# Middle arcs use m0.. for middle tokens, S and O for the entity slots, and
# name the middle token that heads the clause.
RELATIONS = {
    "org:founded_by": ("PERSON", ["founded/found/VBD"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:employee_of": ("PERSON", ["serves/serve/VBZ"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:member_of": ("PERSON", ["joined/join/VBD"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:born_in": ("PERSON", ["born/bear/VBN"], "LOCATION", "m0", [("m0", "S", "nsubjpass"), ("m0", "O", "obl")]),
    "per:lives_in": ("PERSON", ["inhabits/inhabit/VBZ"], "LOCATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:spouse": ("PERSON", ["married/marry/VBD"], "PERSON", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:parent": ("PERSON", ["fathered/father/VBD"], "PERSON", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "org:based_in": ("ORGANIZATION", ["headquartered/headquarter/VBN"], "LOCATION", "m0",
                     [("m0", "S", "nsubjpass"), ("m0", "O", "obl")]),
    "org:acquired": ("ORGANIZATION", ["acquired/acquire/VBD"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    "per:visited": ("PERSON", ["visited/visit/VBD"], "LOCATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
}
# Same entity types as some relations, different wording.
DISTRACTORS = [
    ("PERSON", ["met/meet/VBD"], "PERSON", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    ("PERSON", ["left/leave/VBD"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    ("PERSON", ["praised/praise/VBD"], "LOCATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    ("ORGANIZATION", ["sued/sue/VBD"], "ORGANIZATION", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
    ("LOCATION", ["welcomed/welcome/VBD"], "PERSON", "m0", [("m0", "S", "nsubj"), ("m0", "O", "dobj")]),
]


def relation_sentence(rng, sid, frame, gold):
    subj_type, middle, obj_type, root_name, arcs = frame
    b = Builder()
    pre = None
    r = rng.random()
    if r < 0.3:
        pre = [b.add("Yesterday", "yesterday", "NN"), b.add(",", ",", ",")]
    elif r < 0.5:
        y = rng.choice(YEARS)
        pre = [b.add("In", "in", "IN"), b.add(y, y, "CD", "DATE"), b.add(",", ",", ",")]
    s = b.add(subj_type, subj_type.lower(), "NNP", subj_type)
    names = {"S": s}
    for i, m in enumerate(middle):
        w, l, t = m.split("/")
        names[f"m{i}"] = b.add(w, l, t)
    o = b.add(obj_type, obj_type.lower(), "NNP", obj_type)
    names["O"] = o
    for h, d, label in arcs:
        b.arc(names[h], names[d], label)
    root = names[root_name]
    if pre and len(pre) == 2:
        b.arc(root, pre[0], "npadvmod")
        b.arc(root, pre[1], "punct")
    elif pre:
        b.arc(root, pre[0], "prep")
        b.arc(pre[0], pre[1], "pobj")
        b.arc(root, pre[2], "punct")
    if rng.random() < 0.4:
        y = rng.choice(YEARS)
        p = b.add("in", "in", "IN")
        b.arc(root, p, "prep")
        b.arc(p, b.add(y, y, "CD", "DATE"), "pobj")
    b.arc(root, b.add(".", ".", "."), "punct")
    return {
        "sentence": b.record(sid),
        "subj": [s, s + 1],
        "subjType": subj_type,
        "obj": [o, o + 1],
        "objType": obj_type,
        "gold": gold,
    }


def episodes(rng, shot, count, prefix):
    out = []
    labels = sorted(RELATIONS)
    for e in range(count):
        chosen = rng.sample(labels, 5)
        support = {}
        queries = []
        for label in chosen:
            support[label] = [
                relation_sentence(rng, f"{prefix}{e}-{label}-s{k}", RELATIONS[label], label) for k in range(shot)
            ]
            for q in range(2):
                queries.append(relation_sentence(rng, f"{prefix}{e}-{label}-q{q}", RELATIONS[label], label))
        for q in range(3):
            frame = rng.choice(DISTRACTORS)
            queries.append(relation_sentence(rng, f"{prefix}{e}-none-q{q}", frame, "no_relation"))
        rng.shuffle(queries)
        out.append({"way": 5, "shot": shot, "support": support, "queries": queries})
    return out


def write_json(path, value):
    with open(path, "w") as f:
        json.dump(value, f, indent=1)
        f.write("\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--sentences", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rng = random.Random(args.seed)

    corpus = [ANDERSON, DOG, RUNS] + [sentence(rng, f"s{i}") for i in range(args.sentences - 3)]
    with open(os.path.join(args.out, "corpus.jsonl"), "w") as f:
        for rec in corpus:
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")

    surface, path = anderson_specs()
    write_json(os.path.join(args.out, "anderson_surface.json"), surface)
    write_json(os.path.join(args.out, "anderson_path.json"), path)

    erng = random.Random(args.seed + 1)
    write_json(os.path.join(args.out, "episodes_5way1shot.json"), episodes(erng, 1, 20, "a"))
    write_json(os.path.join(args.out, "episodes_5way5shot.json"), episodes(erng, 5, 20, "b"))
    background = [
        relation_sentence(erng, f"bg{i}", DISTRACTORS[i % len(DISTRACTORS)], "no_relation") for i in range(50)
    ]
    write_json(os.path.join(args.out, "background.json"), background)


if __name__ == "__main__":
    main()
