#!/usr/bin/env python3
"""Regenerates desk_corpus.csv and desk_embedding.txt.

Vectors are built from orthogonal topic directions: every concept has a
shared component (COMMON) on axis 0, a main topic, optional weaker links to
other topics, and a small private component. Cosines between concepts are
then COMMON**2 plus the products of shared topic weights, which makes the
similarity bands used by selection and clustering easy to place.

Usage: python3 gen_desk.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

DIM = 96
COMMON = 0.6
PRIVATE = 0.08
RELATION_COMMON = 0.8
N_TRIPLES = 400

rng = np.random.default_rng(20240611)

topics = {}


def topic(name):
    if name not in topics:
        topics[name] = 1 + len(topics)
        assert topics[name] < 52, "too many topics"
    return topics[name]


def private():
    u = rng.normal(size=DIM - 52)
    return u / np.linalg.norm(u)


vectors = {}


def concept(name, main, **links):
    assert name not in vectors, name
    v = np.zeros(DIM)
    v[0] = COMMON
    rest = 1.0 - COMMON**2 - PRIVATE**2
    for t, w in links.items():
        v[topic(t)] = w
        rest -= w * w
    assert rest > 0.3, name
    v[topic(main)] = np.sqrt(rest)
    v[52:] = PRIVATE * private()
    vectors[name] = v / np.linalg.norm(v)


def relation(key, on_common=True):
    v = np.zeros(DIM)
    if on_common:
        v[0] = RELATION_COMMON
        v[52:] = np.sqrt(1 - RELATION_COMMON**2) * private()
    else:
        v[topic("REL_" + key)] = 1.0
    vectors[key] = v / np.linalg.norm(v)


triples = []


def t(rel, subj, obj):
    triples.append((rel, subj, obj))


def group(names, main, **links):
    for n in names:
        concept(n, main, **links)


# relations; related_to is kept away from every concept
for r in ["is_a", "has_a", "part_of", "used_for", "capable_of", "at_location", "has_property",
          "made_of", "causes", "desires", "has_prerequisite", "receives_action", "form_of",
          "synonym", "has_subevent", "motivated_by_goal", "antonym", "located_near"]:
    relation(r)
relation("related_to", on_common=False)

# context of the first round
concept("dog", "DOG")
concept("bone", "BONE")
concept("chew", "CHEW")
concept("manducate", "CHEW")
concept("remasticate", "CHEW")
concept("poodle", "BREED")
t("FormOf", "manducate", "chew")
t("Synonym", "remasticate", "chew")
t("RelatedTo", "poodle", "dog")
t("IsA", "poodle", "breed")
concept("breed", "BREED")

# round 1 groups; link weight to the context orders them
G1 = ["bark", "growl", "howl", "whine", "woof"]
G2 = ["fur", "tail", "snout", "whisker", "coat"]
G3 = ["animal", "animals"]
G4 = ["calcium", "marrow", "skeleton", "cartilage"]
G5 = ["teeth", "jaw", "gum", "saliva"]
group(G1, "SOUND", DOG=0.28)
group(G2, "BODY", DOG=0.11)
group(G3, "ANIM", DOG=0.2)
group(G4, "BONESTUFF", BONE=0.09)
group(G5, "MOUTH", CHEW=0.25)
for o in G1:
    t("CapableOf", "dog", o)
for o in G2:
    t("HasA", "dog", o)
t("IsA", "dog", "animal")
t("PartOf", "dog", "animals")
for rel, o in zip(["MadeOf", "HasA", "PartOf", "MadeOf"], G4):
    t(rel, "bone", o)
for rel, o in zip(["HasPrerequisite", "HasPrerequisite", "HasSubevent", "Causes"], G5):
    t(rel, "chew", o)
# near-context symbols and filtered edges around the dog
concept("puppy", "DOG")
t("IsA", "puppy", "dog")
t("RelatedTo", "dog", "cat")
t("RelatedTo", "bone", "stick")
concept("cat", "CAT")
concept("stick", "WOOD")

# round 2: from {animal, animals}
H1 = ["zoo", "cage", "zookeeper", "safari"]
H2 = ["farming", "garden", "gardening", "horticulture"]
H3 = ["mammal", "bird", "reptile", "insect"]
group(H1, "ZOO", ANIM=0.27)
group(H2, "GARD", ANIM=0.17)
group(H3, "KIND", ANIM=0.08)
for i, o in enumerate(H1 + H2 + H3):
    subj = "animal" if i % 2 == 0 else "animals"
    t(["AtLocation", "AtLocation", "UsedFor", "AtLocation", "HasA"][i % 5], subj, o)
t("RelatedTo", "animal", "creature")
concept("creature", "MONSTER")

# round 3: from the gardening group
I1 = ["soil", "seed", "flower", "compost"]
I2 = ["lawn", "mowing", "yard", "outside"]
group(I1, "SOIL", GARD=0.27)
group(I2, "YARD", GARD=0.12)
for i, o in enumerate(I1 + I2):
    t(["HasA", "UsedFor", "AtLocation", "Causes"][i % 4], H2[i % 4], o)

# round 4: from the lawn group
J1 = ["grass", "fence", "hedge", "patio"]
J2 = ["weather", "climate", "forecast", "season"]
group(J1, "FENCE", YARD=0.27)
group(J2, "WEATHER", YARD=0.12)
for i, o in enumerate(J1 + J2):
    t(["HasA", "AtLocation", "HasProperty", "ReceivesAction"][i % 4], I2[i % 4], o)

# round 5: from the weather group
K1 = ["temperature", "humidity", "wind", "sunshine"]
K2 = ["cloud", "rain", "sky", "storm"]
group(K1, "CLIMATE", WEATHER=0.27)
group(K2, "SKY", WEATHER=0.12)
for i, o in enumerate(K1 + K2):
    t(["HasA", "Causes", "HasProperty", "HasSubevent"][i % 4], J2[i % 4], o)

# round 6: from the sky group, then nothing new
W = ["water", "puddle", "river", "ocean"]
group(W, "WATER", SKY=0.15)
for i, o in enumerate(W):
    t(["MadeOf", "Causes", "Causes", "LocatedNear"][i], K2[i], o)
t("AtLocation", "river", "ocean")
t("RelatedTo", "water", "rain")
t("IsA", "puddle", "water")

# the injured-paw alternative
concept("injure", "INJURE")
concept("paw", "PAW", DOG=0.2)
INJ = ["pain", "wound", "bleeding", "limp"]
PAWG = ["claw", "toe", "pad", "footprint"]
group(INJ, "HURT", INJURE=0.24)
group(PAWG, "FOOT", PAW=0.12)
for i, o in enumerate(INJ):
    t(["Causes", "Causes", "HasSubevent", "Causes"][i], "injure", o)
for i, o in enumerate(PAWG):
    t(["HasA", "HasA", "PartOf", "Causes"][i], "paw", o)
MED = ["treatment", "bandage", "clinic", "medicine"]
group(MED, "MED", HURT=0.15)
concept("veterinarian", "MED", DOG=0.15)
for i, o in enumerate(MED):
    t(["MotivatedByGoal", "UsedFor", "AtLocation", "UsedFor"][i], INJ[i], o)
t("AtLocation", "clinic", "veterinarian")
t("UsedFor", "medicine", "treatment")
concept("family", "FAMILY")
concept("take", "TAKE")
t("HasA", "family", "parent")
t("CapableOf", "family", "take")
concept("parent", "FAMILY")

# unrelated padding topics
padding = {
    "KITCHEN": ["kitchen", "stove", "oven", "pan", "spoon", "fork", "knife", "plate", "bowl", "kettle",
                "sink", "fridge", "cupboard", "recipe", "cook"],
    "MUSIC": ["guitar", "piano", "violin", "drum", "melody", "song", "concert", "orchestra", "singer",
              "rhythm", "harmony", "chord", "trumpet", "flute", "choir"],
    "COMPUTER": ["computer", "keyboard", "monitor", "mouse_device", "software", "program", "laptop",
                 "server", "network", "printer", "database", "algorithm", "byte", "screen", "code"],
    "VEHICLE": ["car", "truck", "bicycle", "engine", "wheel", "tire", "brake", "garage", "highway",
                "driver", "fuel", "bus", "train", "motor", "road"],
    "SCHOOL": ["school", "teacher", "student", "lesson", "homework", "classroom", "chalk", "exam",
               "pencil", "notebook", "library", "textbook", "grade", "lecture", "campus"],
    "SPORT": ["football", "tennis", "goal", "referee", "stadium", "racket", "team", "coach", "medal",
              "athlete", "match", "score", "tournament", "whistle", "trophy"],
    "OFFICE": ["office", "desk", "chair", "meeting", "manager", "stapler", "folder", "memo", "salary",
               "contract", "deadline", "invoice", "colleague", "report", "calendar"],
    "CLOTHING": ["shirt", "trousers", "jacket", "shoe", "sock", "button", "zipper", "scarf", "glove",
                 "hat", "dress", "collar", "sleeve", "wardrobe", "fabric"],
    "TOOL": ["hammer", "nail", "screw", "wrench", "saw", "drill", "ladder", "toolbox", "pliers",
             "chisel", "bolt", "glue", "tape", "workbench", "screwdriver"],
    "MONEY": ["money", "bank", "coin", "wallet", "credit", "loan", "price", "market", "shop",
              "cashier", "receipt", "budget", "tax", "profit", "bill"],
    "TRAVEL": ["airport", "ticket", "passport", "luggage", "hotel", "flight", "tourist", "map",
               "suitcase", "journey", "border", "visa", "souvenir", "station", "cruise"],
    "HOUSE": ["house", "roof", "window", "door", "wall", "floor", "stairs", "bedroom", "carpet",
              "curtain", "lamp", "sofa", "ceiling", "chimney", "basement"],
}
pad_rels = ["IsA", "HasA", "UsedFor", "AtLocation", "PartOf", "CapableOf", "MadeOf", "HasProperty",
            "ReceivesAction", "RelatedTo", "Desires", "Causes"]
for name, words in padding.items():
    for w in words:
        if w != "mouse_device":
            concept(w, name)

# mouse_device has no vector of its own; lookup goes through its parts
concept("mouse", "COMPUTER")
concept("device", "COMPUTER")

designed = len(triples)
pad_pool = []
for name, words in padding.items():
    for i, s in enumerate(words):
        for j in (1, 3, 7):
            o = words[(i + j) % len(words)]
            pad_pool.append((s, o))
rng.shuffle(pad_pool)
k = 0
seen = set()
while len(triples) < N_TRIPLES:
    s, o = pad_pool[k % len(pad_pool)]
    rel = pad_rels[k % len(pad_rels)]
    k += 1
    if (rel, s, o) in seen:
        continue
    seen.add((rel, s, o))
    t(rel, s, o)

assert len(set(triples)) == N_TRIPLES, (len(set(triples)), N_TRIPLES)
symbols = {x for (_, s, o) in triples for x in (s, o)}
# a few vocabulary entries the corpus does not use
concept("kennel", "DOG", BODY=0.1)
concept("leash", "DOG", SOUND=0.1)

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parent
with open(out / "desk_corpus.csv", "w") as f:
    f.write("# relation,subject,object\n")
    f.write(f"# {designed} designed triples followed by {N_TRIPLES - designed} padding triples\n")
    for rel, s, o in triples:
        f.write(f"{rel},{s},{o}\n")

keys = sorted(vectors)
with open(out / "desk_embedding.txt", "w") as f:
    f.write(f"{len(keys)} {DIM}\n")
    for key in keys:
        f.write(key + " " + " ".join(f"{x:.6f}" for x in vectors[key]) + "\n")

missing = sorted(s for s in symbols if s not in vectors)
print(f"{len(triples)} triples, {len(keys)} vectors, {len(topics)} topics; symbols without vectors: {missing}")
