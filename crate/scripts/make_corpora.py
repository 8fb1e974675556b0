#!/usr/bin/env python3
"""Writes the demo and synthetic product corpora as line-delimited JSON.

The demo corpus holds six products. The synthetic corpus is a superset used
for retrieval tests that need more than ten candidates per query.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"

DEMO = [
    ("soapy-slider", "Soapy slider",
     "Unique 2 piece horizontal soap dish with a slide that keeps excess soapy water away from the bar of soap. "
     "extendable for different sizes of soap bars. "
     "it removes soapy water away from the bar of soap keeping it dryer to last longer. "
     "Easy to clean and looks great in any bathroom."),
    ("knife-rolodex", "Knife rolodex",
     "A rotating wheel with multiple slots that holds knives of various lengths. "
     "Each slot grips the blade so every knife stays secure on the kitchen counter."),
    ("maximizing-phone-tablet", "Maximizing phone tablet",
     "A telescopic frame that expands to fit phones of any width. "
     "Turns your phone into a tablet screen for watching movies on the couch."),
    ("soap-saver", "Soap saver",
     "Fuses small used bars of soap together so the soap never slips down the drain. "
     "Saves soap and money in the shower."),
    ("yoga-mat-washer", "Yoga mat wash stack machine",
     "Cleans and dries several yoga mats at once. "
     "Stacks the mats on racks so water drains away and they stay fresh for the next class."),
    ("camp-brew", "Camp brew coffee maker",
     "Light weight all in one coffee grinder and maker for camping and hiking. "
     "A built in timer tells you when the coffee is done brewing."),
]

EXTRA = [
    ("touchless-soap-dispenser", "Touchless soap dispensing unit",
     "A winding inner tube stretches to reach inside any bottle. "
     "Dispenses liquid soap without touching the pump."),
    ("laundry-folding-table", "Laundry folding table",
     "Table that folds down out of the laundry room wall. "
     "Provides a flat surface for folding laundry and hides away when not in use."),
    ("velcro-pocket-shoe", "On/off velcro pocket shoe",
     "Attached or detached pocket for any shoe. "
     "Holds keys and cash while you run."),
    ("restsack", "The restsack",
     "Backpack that doubles as an outdoor chair stool. "
     "Carry your gear on the trail and sit down anywhere."),
    ("adjustable-shoe-rack", "Adjustable shoe rack",
     "Shelves slide apart to hold boots and sandals. "
     "Keeps the closet floor tidy."),
    ("bike-phone-mount", "Bike phone mount",
     "A clamp on the handlebar grips your phone while you ride. "
     "Rubber pads protect the screen from bumps."),
    ("expanding-drawer-organizer", "Expanding drawer organizer",
     "Bamboo trays expand to fill drawers of any width. "
     "Sorts spoons and forks in the kitchen."),
    ("collapsible-water-bottle", "Collapsible water bottle",
     "Silicone bottle folds flat when empty. "
     "Clips to a backpack for hiking."),
    ("shower-caddy", "Rust proof shower caddy",
     "Hangs from the shower head and holds shampoo and soap. "
     "Drain holes let water run off."),
    ("dog-bowl-stand", "Raised dog bowl stand",
     "Lifts food and water bowls off the floor for large dogs. "
     "Rubber feet stop the stand from sliding."),
    ("umbrella-dryer", "Umbrella dryer",
     "A stand that catches drips from wet umbrellas by the door. "
     "A fan dries the umbrella quickly."),
    ("colander-cutting-board", "Colander cutting board",
     "Cutting board with a sliding colander to rinse vegetables. "
     "Water drains into the sink."),
    ("spice-carousel", "Spice carousel",
     "A rotating rack holds twenty spice jars on the counter. "
     "Labels face out so you find the right spice fast."),
    ("hat-rack", "Wall hat rack",
     "Pegs on a wooden board hold caps and hats by the door. "
     "Mounts with two screws."),
]


def write(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for pid, title, text in rows:
            fh.write(json.dumps({"id": pid, "title": title, "text": text}, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    write(ROOT / "demo" / "corpus.jsonl", DEMO)
    write(ROOT / "synthetic" / "corpus.jsonl", DEMO + EXTRA)
