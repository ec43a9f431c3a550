"""Regenerate the static data files shipped in src/noveval/_data/.

The CIFAR10 base/novel listings are fixed verbatim. The CIFAR100 and
ImageNet100 random splits are produced by the package's own generators with
the seeds recorded below, so the shipped files can always be rebuilt:

  cifar100/random    random_split, seed searched so that the 'people'
                     superclass lands base={baby,girl,man}, novel={boy,woman}
  imagenet100/random stratified_random_split (3-4 base classes per
                     high-level category), seed 0

Run from the repo root:  python scripts/gen_builtin_data.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from noveval.splits import (  # noqa: E402
    ClassTaxonomy,
    SplitSpec,
    random_split,
    semantic_split,
    split_to_dict,
    stratified_random_split,
    taxonomy_to_dict,
)

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "noveval" / "_data"

# --- CIFAR10 ------------------------------------------------------------------

CIFAR10_CLASSES = (
    "airplane", "automobile", "bird", "cat", "deer",
    "dog", "frog", "horse", "ship", "truck",
)
CIFAR10_GROUPS = {
    "airplane": "vehicle", "automobile": "vehicle", "ship": "vehicle",
    "truck": "vehicle",
    "bird": "animal", "cat": "animal", "deer": "animal", "dog": "animal",
    "frog": "animal", "horse": "animal",
}

CIFAR10_RANDOM_BASE = ("automobile", "bird", "deer", "frog", "ship")
CIFAR10_SEMANTIC_BASE = ("airplane", "automobile", "bird", "ship", "truck")

# --- CIFAR100 -----------------------------------------------------------------

CIFAR100_SUPERCLASSES = {
    "aquatic_mammals": ("beaver", "dolphin", "otter", "seal", "whale"),
    "fish": ("aquarium_fish", "flatfish", "ray", "shark", "trout"),
    "flowers": ("orchid", "poppy", "rose", "sunflower", "tulip"),
    "food_containers": ("bottle", "bowl", "can", "cup", "plate"),
    "fruit_and_vegetables": ("apple", "mushroom", "orange", "pear", "sweet_pepper"),
    "household_electrical_devices": ("clock", "keyboard", "lamp", "telephone", "television"),
    "household_furniture": ("bed", "chair", "couch", "table", "wardrobe"),
    "insects": ("bee", "beetle", "butterfly", "caterpillar", "cockroach"),
    "large_carnivores": ("bear", "leopard", "lion", "tiger", "wolf"),
    "large_man-made_outdoor_things": ("bridge", "castle", "house", "road", "skyscraper"),
    "large_natural_outdoor_scenes": ("cloud", "forest", "mountain", "plain", "sea"),
    "large_omnivores_and_herbivores": ("camel", "cattle", "chimpanzee", "elephant", "kangaroo"),
    "medium_mammals": ("fox", "porcupine", "possum", "raccoon", "skunk"),
    "non-insect_invertebrates": ("crab", "lobster", "snail", "spider", "worm"),
    "people": ("baby", "boy", "girl", "man", "woman"),
    "reptiles": ("crocodile", "dinosaur", "lizard", "snake", "turtle"),
    "small_mammals": ("hamster", "mouse", "rabbit", "shrew", "squirrel"),
    "trees": ("maple_tree", "oak_tree", "palm_tree", "pine_tree", "willow_tree"),
    "vehicles_1": ("bicycle", "bus", "motorcycle", "pickup_truck", "train"),
    "vehicles_2": ("lawn_mower", "rocket", "streetcar", "tank", "tractor"),
}

# FC100 assignment: train superclasses -> base; val+test superclasses -> novel.
FC100_BASE_SUPERCLASSES = (
    "fish", "flowers", "food_containers", "fruit_and_vegetables",
    "household_electrical_devices", "household_furniture",
    "large_man-made_outdoor_things", "large_natural_outdoor_scenes",
    "reptiles", "trees", "vehicles_1", "vehicles_2",
)

# --- ImageNet100 ----------------------------------------------------------------
# 100 ILSVRC-2012 synsets, 6-7 per high-level category (8 artefact + 8 animal
# categories). The engine treats wnids as opaque class names; human-readable
# names are kept here as comments only.

IMAGENET100_CATEGORIES = {
    # artefact
    "motor_vehicle": (
        "n02701002",  # ambulance
        "n03345487",  # fire engine
        "n03417042",  # garbage truck
        "n03594945",  # jeep
        "n03670208",  # limousine
        "n03770679",  # minivan
        "n03977966",  # police van
    ),
    "craft": (
        "n02690373",  # airliner
        "n02692877",  # airship
        "n03095699",  # container ship
        "n03344393",  # fireboat
        "n03447447",  # gondola
        "n04147183",  # schooner
        "n04273569",  # speedboat
    ),
    "durables": (
        "n03207941",  # dishwasher
        "n03761084",  # microwave
        "n04070727",  # refrigerator
        "n04442312",  # toaster
        "n04517823",  # vacuum
        "n04554684",  # washer
    ),
    "garment": (
        "n02963159",  # cardigan
        "n03595614",  # jersey
        "n03617480",  # kimono
        "n03770439",  # miniskirt
        "n03980874",  # poncho
        "n04370456",  # sweatshirt
    ),
    "musical_instrument": (
        "n02672831",  # accordion
        "n02676566",  # acoustic guitar
        "n02787622",  # banjo
        "n02992211",  # cello
        "n03452741",  # grand piano
        "n04536866",  # violin
    ),
    "game_equipment": (
        "n02799071",  # baseball
        "n02802426",  # basketball
        "n03445777",  # golf ball
        "n04254680",  # soccer ball
        "n04409515",  # tennis ball
        "n04540053",  # volleyball
    ),
    "furnishing": (
        "n02791124",  # barber chair
        "n02870880",  # bookcase
        "n03201208",  # dining table
        "n03376595",  # folding chair
        "n04099969",  # rocking chair
        "n04344873",  # studio couch
    ),
    "tool": (
        "n03000684",  # chain saw
        "n03481172",  # hammer
        "n03498962",  # hatchet
        "n03954731",  # plane
        "n03995372",  # power drill
        "n04154565",  # screwdriver
    ),
    # animal
    "ungulate": (
        "n02389026",  # sorrel
        "n02391049",  # zebra
        "n02398521",  # hippopotamus
        "n02403003",  # ox
        "n02410509",  # bison
        "n02417914",  # ibex
        "n02423022",  # gazelle
    ),
    "primate": (
        "n02480495",  # orangutan
        "n02480855",  # gorilla
        "n02481823",  # chimpanzee
        "n02483362",  # gibbon
        "n02486410",  # baboon
        "n02487347",  # macaque
        "n02492035",  # capuchin
    ),
    "feline": (
        "n02123045",  # tabby
        "n02123394",  # Persian cat
        "n02124075",  # Egyptian cat
        "n02128385",  # leopard
        "n02129165",  # lion
        "n02129604",  # tiger
    ),
    "working_dog": (
        "n02106550",  # Rottweiler
        "n02106662",  # German shepherd
        "n02107142",  # Doberman
        "n02108089",  # boxer
        "n02109525",  # Saint Bernard
        "n02110185",  # Siberian husky
    ),
    "saurian": (
        "n01675722",  # banded gecko
        "n01677366",  # common iguana
        "n01682714",  # American chameleon
        "n01685808",  # whiptail
        "n01687978",  # agama
        "n01695060",  # Komodo dragon
    ),
    "aquatic_bird": (
        "n01855672",  # goose
        "n02002556",  # white stork
        "n02006656",  # spoonbill
        "n02007558",  # flamingo
        "n02009912",  # American egret
        "n02051845",  # pelican
    ),
    "insect": (
        "n02165456",  # ladybug
        "n02177972",  # weevil
        "n02190166",  # fly
        "n02206856",  # bee
        "n02219486",  # ant
        "n02279972",  # monarch
    ),
    "aquatic_vertebrate": (
        "n01440764",  # tench
        "n01443537",  # goldfish
        "n01484850",  # great white shark
        "n01491361",  # tiger shark
        "n01494475",  # hammerhead
        "n02607072",  # anemone fish
    ),
}

ARTEFACT_CATEGORIES = (
    "motor_vehicle", "craft", "durables", "garment",
    "musical_instrument", "game_equipment", "furnishing", "tool",
)

IMAGENET100_RANDOM_SEED = 0


def build_taxonomies() -> dict[str, ClassTaxonomy]:
    cifar100_classes = tuple(sorted(
        c for members in CIFAR100_SUPERCLASSES.values() for c in members
    ))
    cifar100_groups = {
        c: g for g, members in CIFAR100_SUPERCLASSES.items() for c in members
    }
    in100_classes = tuple(
        c for members in IMAGENET100_CATEGORIES.values() for c in members
    )
    in100_groups = {
        c: g for g, members in IMAGENET100_CATEGORIES.items() for c in members
    }
    return {
        "cifar10": ClassTaxonomy("cifar10", CIFAR10_CLASSES, CIFAR10_GROUPS),
        "cifar100": ClassTaxonomy("cifar100", cifar100_classes, cifar100_groups),
        "imagenet100": ClassTaxonomy("imagenet100", in100_classes, in100_groups),
    }


def find_cifar100_random_seed(taxonomy: ClassTaxonomy) -> int:
    """First seed whose 50/50 draw puts exactly baby/girl/man in base."""
    want_base = {"baby", "girl", "man"}
    people = set(CIFAR100_SUPERCLASSES["people"])
    for seed in range(100_000):
        split = random_split(taxonomy, 50, seed)
        if split.base & people == want_base:
            return seed
    raise RuntimeError("no matching seed found")


def as_builtin(split: SplitSpec, kind: str) -> SplitSpec:
    return SplitSpec(split.dataset_id, "builtin", split.base, split.novel, kind=kind)


def dump(name: str, doc: dict) -> None:
    path = DATA_DIR / name
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", "utf-8")
    print(f"wrote {path}")


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    taxonomies = build_taxonomies()
    for name, tax in taxonomies.items():
        dump(f"taxonomy_{name}.json", taxonomy_to_dict(tax))

    c10 = taxonomies["cifar10"]
    c10_all = frozenset(c10.classes)
    splits = {
        ("cifar10", "random"): SplitSpec(
            "cifar10", "builtin", frozenset(CIFAR10_RANDOM_BASE),
            c10_all - frozenset(CIFAR10_RANDOM_BASE), kind="random"),
        ("cifar10", "semantic"): SplitSpec(
            "cifar10", "builtin", frozenset(CIFAR10_SEMANTIC_BASE),
            c10_all - frozenset(CIFAR10_SEMANTIC_BASE), kind="semantic"),
    }

    c100 = taxonomies["cifar100"]
    c100_seed = find_cifar100_random_seed(c100)
    print(f"cifar100 random seed: {c100_seed}")
    splits[("cifar100", "random")] = as_builtin(
        random_split(c100, 50, c100_seed), "random")
    splits[("cifar100", "semantic")] = as_builtin(
        semantic_split(c100, FC100_BASE_SUPERCLASSES), "semantic")

    in100 = taxonomies["imagenet100"]
    splits[("imagenet100", "random")] = as_builtin(
        stratified_random_split(in100, 50, IMAGENET100_RANDOM_SEED), "random")
    splits[("imagenet100", "semantic")] = as_builtin(
        semantic_split(in100, ARTEFACT_CATEGORIES), "semantic")

    for (ds, kind), split in splits.items():
        split.validate_against(taxonomies[ds])
        dump(f"split_{ds}_{kind}.json", split_to_dict(split))


if __name__ == "__main__":
    main()
