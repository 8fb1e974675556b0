#!/usr/bin/env python3
"""Writes small deterministic word vectors for the demo and synthetic corpora.

Each word is a weighted mix of a few concept axes plus hash-seeded noise, so
words from one product domain sit close together. The pieces of knowledge
base property names (e.g. "personal", "product") get their own axes with a
larger weight, so shared property tokens dominate document similarity.
"""
import hashlib
import json
import pathlib
import re
import struct

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"
DIM = 32
NOISE = 0.08

AXES = {name: i for i, name in enumerate([
    "bath", "kitchen", "device", "adjust", "personal", "spatial", "measure", "remove",
    "liquid", "solid", "outdoor", "clothing", "furniture", "fitness", "laundry", "hold", "animal",
])}

CONCEPTS = {
    "bath": "soap dish shower shampoo bathroom soapy sink towel toiletry cleansing agent",
    "kitchen": "knife blade kitchen counter spoon fork colander cutting spice jar coffee grinder maker "
               "brew vegetable food bowl utensil drink cut",
    "device": "phone tablet screen movie watch timer handlebar mount electronic communication display clock",
    "adjust": "extendable different expand stretch fit telescopic various multiple adjust changing adapting",
    "measure": "size length width height dimension large small weight distance physical scalar measurable",
    "remove": "remove removing drain dry clean wash rinse drying cleaning drainage",
    "liquid": "water liquid soapy drip wet coffee shampoo soluble drink",
    "solid": "solid tangible thing bar board wooden rubber silicone bamboo material polymer shaped",
    "outdoor": "outdoor hiking camping trail backpack gear bike ride carry light",
    "clothing": "shoe boot sandal hat cap pocket key cash footwear clothing headwear",
    "furniture": "table chair stool rack shelf stand wall floor closet drawer door peg furniture seating "
                 "support structural",
    "fitness": "yoga mat class run exercise fresh",
    "laundry": "laundry fold folding",
    "hold": "hold grip clamp slot tray container bag holding storage",
    "animal": "dog cat animal mammal canis felis domesticated genus",
}

# Property-name pieces that should dominate when they appear.
STRONG = {"personal": ("personal", 3.0), "product": ("personal", 3.0),
          "spatial": ("spatial", 3.0), "quantity": ("spatial", 3.0)}


def noise(word):
    out = []
    counter = 0
    while len(out) < DIM:
        digest = hashlib.sha256(f"{word}:{counter}".encode()).digest()
        for j in range(0, len(digest), 4):
            (u,) = struct.unpack("<I", digest[j:j + 4])
            out.append((u / 2**32 * 2.0 - 1.0) * NOISE)
        counter += 1
    return out[:DIM]


def vector(word):
    v = noise(word)
    if word in STRONG:
        axis, weight = STRONG[word]
        v[AXES[axis]] += weight
        return v
    hits = [axis for axis, words in CONCEPTS.items() if word in words.split()]
    for axis in hits:
        v[AXES[axis]] += 1.0 / len(hits) ** 0.5
    if not hits:
        # unrelated words get a weaker, word-specific direction
        v[17 + int(hashlib.sha256(word.encode()).hexdigest(), 16) % (DIM - 17)] += 0.6
    return v


def camel_pieces(name):
    return [p.lower() for p in re.findall(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+", name)]


def vocabulary():
    words = set()
    for corpus in (ROOT / "demo" / "corpus.jsonl", ROOT / "synthetic" / "corpus.jsonl"):
        for line in corpus.read_text(encoding="utf-8").splitlines():
            text = json.loads(line)["text"].lower()
            words.update(re.findall(r"[a-z0-9]+(?:[-'][a-z0-9]+)*", text))
    for kb in (ROOT / "demo" / "kb.jsonl", ROOT / "demo" / "kb_fallback.jsonl"):
        for line in kb.read_text(encoding="utf-8").splitlines():
            rec = json.loads(line)
            words.add(rec["term"])
            words.update(camel_pieces(rec["property"]))
    for text in CONCEPTS.values():
        words.update(text.split())
    words.update(STRONG)
    words.update(EXTRA_LEMMAS)
    return sorted(words)


# Base forms the analyzer produces that differ from every surface form.
EXTRA_LEMMAS = """
attach backpack bar boot bowl brew build bump cap carry catch clean clip detach dispense dog double
drain drawer drip dry expand fold foot fork fuse grip hang hat hide hold hole jar keep key knife label
length lift long look mat mount movie pad peg phone protect provide rack remove sandal save screw
shelf size slide slip slot sort spoon stack stay stretch tell touch tray turn umbrella use vegetable
watch wind
""".split()


if __name__ == "__main__":
    out = ROOT / "demo" / "vectors.txt"
    with open(out, "w", encoding="utf-8") as fh:
        for word in vocabulary():
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in vector(word)) + "\n")
