#!/usr/bin/env python3
"""Writes the demo knowledge base (primary) and the fallback hypernym file.

Each line is {"term": lemma, "property": CamelCaseName, "level": int}.
Level 1 is a direct superset; higher levels are more general.
"""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "demo"

PRIMARY = {
    "soap": [("ToiletrySubstance", 1), ("CleaningAgent", 1), ("WaterSolubleStuff", 2),
             ("PersonalProduct", 2), ("ChemicalSubstance", 3), ("ConsumableProduct", 3),
             ("TangibleThing", 4), ("PartiallyTangible", 5)],
    "shampoo": [("ToiletrySubstance", 1), ("PersonalProduct", 2), ("LiquidTangibleThing", 2)],
    "size": [("SpatialQuantity", 1), ("PhysicalQuantity", 2), ("ScalarQuantity", 3),
             ("MeasurableQuantity", 4)],
    "length": [("SpatialQuantity", 1), ("Distance", 1), ("PhysicalQuantity", 2)],
    "width": [("SpatialQuantity", 1), ("Distance", 1), ("PhysicalQuantity", 2)],
    "height": [("SpatialQuantity", 1), ("Distance", 1), ("PhysicalQuantity", 2)],
    "dimension": [("SpatialQuantity", 1), ("PhysicalQuantity", 2)],
    "bar": [("BarShapedObject", 1), ("SolidTangibleThing", 2), ("TangibleThing", 3)],
    "water": [("LiquidTangibleThing", 1), ("Drink", 2), ("InorganicCompound", 2),
              ("TangibleThing", 3)],
    "liquid": [("LiquidTangibleThing", 1), ("TangibleThing", 3)],
    "remove": [("RemovingSomething", 1), ("PhysicalEvent", 2), ("Action", 3)],
    "drain": [("DrainageDevice", 1), ("RemovingSomething", 2), ("PlumbingFixture", 2)],
    "dry": [("DryingSomething", 1), ("RemovingSomething", 2), ("PhysicalEvent", 3)],
    "clean": [("CleaningEvent", 1), ("RemovingSomething", 2), ("PhysicalEvent", 3)],
    "wash": [("CleaningEvent", 1), ("RemovingSomething", 2), ("PhysicalEvent", 3)],
    "rinse": [("CleaningEvent", 1), ("RemovingSomething", 2)],
    "knife": [("CuttingDevice", 1), ("KitchenUtensil", 1), ("HandTool", 2),
              ("PersonalProduct", 2), ("SolidTangibleThing", 3)],
    "blade": [("CuttingEdge", 1), ("SolidTangibleThing", 3)],
    "phone": [("CommunicationDevice", 1), ("ElectronicDevice", 2), ("PersonalProduct", 2),
              ("SolidTangibleThing", 3)],
    "tablet": [("ElectronicDevice", 1), ("PersonalProduct", 2), ("SolidTangibleThing", 3)],
    "screen": [("DisplayDevice", 1), ("ElectronicDevice", 2)],
    "umbrella": [("RainProtectionDevice", 1), ("PersonalProduct", 2)],
    "shoe": [("Footwear", 1), ("ClothingItem", 2), ("PersonalProduct", 3)],
    "boot": [("Footwear", 1), ("ClothingItem", 2), ("PersonalProduct", 3)],
    "sandal": [("Footwear", 1), ("ClothingItem", 2), ("PersonalProduct", 3)],
    "hat": [("Headwear", 1), ("ClothingItem", 2), ("PersonalProduct", 3)],
    "cap": [("Headwear", 1), ("ClothingItem", 2), ("PersonalProduct", 3)],
    "backpack": [("Bag", 1), ("Container", 2), ("PersonalProduct", 2)],
    "pocket": [("ClothingPart", 1), ("Container", 2)],
    "mat": [("FloorCovering", 1), ("SolidTangibleThing", 3)],
    "yoga": [("ExerciseActivity", 1), ("Action", 3)],
    "coffee": [("Drink", 1), ("FoodOrDrink", 2), ("LiquidTangibleThing", 2)],
    "food": [("FoodOrDrink", 1)],
    "dish": [("Container", 1), ("KitchenUtensil", 2), ("SolidTangibleThing", 3)],
    "bottle": [("Container", 1), ("SolidTangibleThing", 3)],
    "jar": [("Container", 1), ("SolidTangibleThing", 3)],
    "bowl": [("Container", 1), ("KitchenUtensil", 2)],
    "tray": [("Container", 1), ("SolidTangibleThing", 3)],
    "drawer": [("Container", 1), ("FurniturePart", 2)],
    "spoon": [("KitchenUtensil", 1), ("SolidTangibleThing", 3)],
    "fork": [("KitchenUtensil", 1), ("SolidTangibleThing", 3)],
    "table": [("FurnitureItem", 1), ("SolidTangibleThing", 3)],
    "chair": [("FurnitureItem", 1), ("SeatingDevice", 1), ("SolidTangibleThing", 3)],
    "stool": [("FurnitureItem", 1), ("SeatingDevice", 1), ("SolidTangibleThing", 3)],
    "rack": [("FurnitureItem", 1), ("StorageDevice", 1)],
    "shelf": [("FurnitureItem", 1), ("StorageDevice", 1)],
    "stand": [("FurnitureItem", 1), ("SupportStructure", 1)],
    "wheel": [("MechanicalDevice", 1), ("SolidTangibleThing", 3)],
    "timer": [("ClockDevice", 1), ("ElectronicDevice", 2)],
    "frame": [("StructuralComponent", 1), ("SupportStructure", 2)],
    "expand": [("ChangingSize", 1), ("IncreasingSomething", 1)],
    "stretch": [("ChangingSize", 1)],
    "fit": [("AdaptingSomething", 1)],
    "hold": [("HoldingSomething", 1)],
    "grip": [("HoldingSomething", 1)],
    "clamp": [("HoldingSomething", 1), ("HandTool", 2)],
    "cat": [("DomesticatedAnimal", 1), ("FelisGenus", 1), ("Mammal", 3)],
}

DOG_ADJECTIVES = [
    "Domestic", "Carnivorous", "Furry", "Quadruped", "Social", "Trainable", "Barking", "Loyal",
    "Territorial", "Playful", "Warmblooded", "Vertebrate", "Terrestrial", "Sentient", "Mobile",
    "Living", "Breathing", "Pettable", "Companion", "Herding",
]
DOG_NOUNS = ["Animal", "Organism", "Mammal", "Creature", "Agent", "Being"]


def dog_entries():
    out = [("DomesticatedAnimal", 1), ("CanisGenus", 1)]
    i = 0
    for adj in DOG_ADJECTIVES:
        for noun in DOG_NOUNS:
            if len(out) == 120:
                return out
            out.append((adj + noun, 1 + (i * 7) % 6))
            i += 1
    return out


FALLBACK = {
    "soap": [("CleansingAgent", 1), ("Formulation", 2)],
    "reef": [("Ridge", 1), ("NaturalElevation", 2), ("GeologicalFormation", 3)],
    "vegetable": [("Produce", 1), ("FoodOrDrink", 2)],
    "bamboo": [("Grass", 1), ("Material", 2)],
    "silicone": [("Polymer", 1), ("Material", 2)],
    "rubber": [("Polymer", 1), ("Material", 2)],
    "sink": [("Basin", 1), ("PlumbingFixture", 1), ("Container", 2)],
    "fan": [("Ventilator", 1), ("ElectronicDevice", 2)],
    "towel": [("PieceOfCloth", 1), ("Artifact", 3)],
}


def write(path, table):
    with open(path, "w", encoding="utf-8") as fh:
        for term, entries in table.items():
            for prop, level in entries:
                fh.write(json.dumps({"term": term, "property": prop, "level": level},
                                    separators=(",", ":")) + "\n")


if __name__ == "__main__":
    table = dict(PRIMARY)
    table["dog"] = dog_entries()
    assert len(table["dog"]) == 120
    write(ROOT / "kb.jsonl", table)
    write(ROOT / "kb_fallback.jsonl", FALLBACK)
