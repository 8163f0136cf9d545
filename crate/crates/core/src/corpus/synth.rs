//! Deterministic synthetic data: a desk-scale food corpus spread over the
//! standard 24 food groups, group-aligned user ratings and a matching
//! concept graph, so the full evaluation protocol can run without any
//! external database.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, FoodItem, RatingSet};
use crate::ontology::{Concept, ConceptKind, Ontology, Relation};
use crate::textpipe;

/// The 24 standard food groups with group-specific vocabulary. Pool words
/// double as concept surface forms, so descriptions annotate back to their
/// group's concepts.
const GROUP_POOLS: &[(&str, &[&str])] = &[
    (
        "American Indian",
        &[
            "frybread",
            "hominy",
            "pemmican",
            "wojapi",
            "bison",
            "mesquite",
            "acorn",
            "chokecherry",
        ],
    ),
    (
        "Baby Foods",
        &[
            "baby", "puree", "infant", "formula", "toddler", "strained", "teething", "weaning",
        ],
    ),
    (
        "Baked Products",
        &[
            "bread",
            "bagel",
            "muffin",
            "biscuit",
            "dough",
            "crust",
            "loaf",
            "croissant",
        ],
    ),
    (
        "Beef Products",
        &[
            "beef", "steak", "brisket", "sirloin", "ribeye", "chuck", "flank", "oxtail",
        ],
    ),
    (
        "Beverages",
        &[
            "drink", "soda", "coffee", "tea", "cocoa", "lemonade", "cider", "smoothie",
        ],
    ),
    (
        "Breakfast Cereals",
        &[
            "breakfast",
            "cereal",
            "oat",
            "granola",
            "porridge",
            "bran",
            "oatmeal",
            "muesli",
        ],
    ),
    (
        "Cereal Grains",
        &[
            "grain", "rice", "barley", "wheat", "quinoa", "millet", "rye", "bulgur",
        ],
    ),
    (
        "Dairy and Egg",
        &[
            "milk", "cheese", "yogurt", "butter", "egg", "cream", "curd", "whey",
        ],
    ),
    (
        "Fast Foods",
        &[
            "burger",
            "fries",
            "pizza",
            "nugget",
            "taco",
            "burrito",
            "hotdog",
            "milkshake",
        ],
    ),
    (
        "Fats and Oils",
        &[
            "oil",
            "lard",
            "margarine",
            "shortening",
            "olive",
            "canola",
            "tallow",
            "ghee",
        ],
    ),
    (
        "Finfish",
        &[
            "fish", "salmon", "tuna", "cod", "trout", "herring", "halibut", "fillet",
        ],
    ),
    (
        "Fruits and Juices",
        &[
            "fruit", "juice", "banana", "apple", "orange", "berry", "melon", "grape",
        ],
    ),
    (
        "Lamb and Veal",
        &[
            "lamb", "veal", "mutton", "shank", "cutlet", "rack", "shoulder", "chop",
        ],
    ),
    (
        "Legumes",
        &[
            "bean", "lentil", "chickpea", "pea", "soybean", "tofu", "hummus", "edamame",
        ],
    ),
    (
        "Nut and Seed",
        &[
            "nut",
            "almond",
            "walnut",
            "cashew",
            "peanut",
            "seed",
            "pistachio",
            "sesame",
        ],
    ),
    (
        "Pork Products",
        &[
            "pork",
            "ham",
            "bacon",
            "loin",
            "spareribs",
            "belly",
            "hock",
            "tenderloin",
        ],
    ),
    (
        "Poultry Products",
        &[
            "chicken",
            "turkey",
            "duck",
            "goose",
            "thigh",
            "wing",
            "drumstick",
            "giblets",
        ],
    ),
    (
        "Restaurant and Meals",
        &[
            "entree", "platter", "dinner", "lunch", "meal", "combo", "buffet", "course",
        ],
    ),
    (
        "Sausages and Luncheon",
        &[
            "sausage",
            "salami",
            "bologna",
            "frankfurter",
            "pepperoni",
            "bratwurst",
            "chorizo",
            "pastrami",
        ],
    ),
    (
        "Snacks",
        &[
            "snack", "chips", "pretzel", "popcorn", "cracker", "crisps", "nachos", "jerky",
        ],
    ),
    (
        "Soups and Sauces",
        &[
            "soup", "broth", "stew", "sauce", "gravy", "chowder", "bisque", "stock",
        ],
    ),
    (
        "Spices and Herbs",
        &[
            "spice", "herb", "basil", "oregano", "cumin", "thyme", "paprika", "cinnamon",
        ],
    ),
    (
        "Sweets",
        &[
            "candy",
            "chocolate",
            "sugar",
            "caramel",
            "fudge",
            "honey",
            "syrup",
            "toffee",
        ],
    ),
    (
        "Vegetables",
        &[
            "vegetable",
            "carrot",
            "spinach",
            "broccoli",
            "potato",
            "onion",
            "tomato",
            "kale",
        ],
    ),
];

/// Filler words shared across groups; deliberately absent from the
/// concept graph so they add term noise without concept noise.
const GENERIC_POOL: &[&str] = &[
    "fresh",
    "serving",
    "pack",
    "style",
    "classic",
    "organic",
    "premium",
    "family",
    "natural",
    "blend",
    "recipe",
    "traditional",
];

/// Groups whose items are predominantly served hot.
const HOT_GROUPS: &[&str] = &[
    "Breakfast Cereals",
    "Fast Foods",
    "Restaurant and Meals",
    "Soups and Sauces",
];

/// Groups whose items are often tagged fresh.
const FRESH_GROUPS: &[&str] = &["Fruits and Juices", "Vegetables"];

/// The 24 standard group names.
pub fn default_groups() -> Vec<String> {
    GROUP_POOLS.iter().map(|(g, _)| (*g).to_owned()).collect()
}

fn slug(text: &str) -> String {
    let mut out = String::new();
    let mut last_dash = true;
    for c in text.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
            last_dash = false;
        } else if !last_dash {
            out.push('-');
            last_dash = true;
        }
    }
    out.trim_end_matches('-').to_owned()
}

fn pool_for(group: &str) -> &'static [&'static str] {
    GROUP_POOLS
        .iter()
        .find(|(g, _)| *g == group)
        .map(|(_, pool)| *pool)
        .unwrap_or(GENERIC_POOL)
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Generate a deterministic corpus with the requested number of items per
/// group. Descriptions are drawn from group-biased term pools.
pub fn generate_synthetic(groups: &[(String, usize)], seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::new();
    for (group, count) in groups {
        let pool = pool_for(group);
        let group_slug = slug(group);
        let hot = HOT_GROUPS.contains(&group.as_str());
        let fresh = FRESH_GROUPS.contains(&group.as_str());
        for seq in 0..*count {
            let first = pool.choose(&mut rng).expect("pool is non-empty");
            let second = pool.choose(&mut rng).expect("pool is non-empty");
            let name = format!("{} {}", capitalize(first), second);

            let mut words = Vec::new();
            for _ in 0..rng.gen_range(5..=8) {
                words.push(*pool.choose(&mut rng).expect("pool is non-empty"));
            }
            for _ in 0..rng.gen_range(1..=3) {
                words.push(*GENERIC_POOL.choose(&mut rng).expect("pool is non-empty"));
            }
            // A little cross-group vocabulary keeps the groups separable
            // without being trivially so.
            for _ in 0..rng.gen_range(0..=2) {
                let (_, other) = GROUP_POOLS.choose(&mut rng).expect("groups exist");
                words.push(*other.choose(&mut rng).expect("pool is non-empty"));
            }
            let description = words.join(" ");

            let mut tags = BTreeSet::new();
            let hot_p = if hot { 0.7 } else { 0.05 };
            if rng.gen_bool(hot_p) {
                tags.insert("hot".to_owned());
            }
            if fresh && rng.gen_bool(0.5) {
                tags.insert("fresh".to_owned());
            }

            items.push(FoodItem {
                id: format!("{group_slug}-{seq:03}"),
                group: group.clone(),
                name,
                description,
                tags,
                concepts: BTreeSet::new(),
            });
        }
    }
    Corpus::new(items).expect("generated ids are unique")
}

/// Default desk-scale corpus: 300 items spread over the 24 groups.
pub fn generate_default(seed: u64) -> Corpus {
    let groups = default_groups();
    let base = 300 / groups.len();
    let extra = 300 % groups.len();
    let spec: Vec<(String, usize)> = groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, base + usize::from(i < extra)))
        .collect();
    generate_synthetic(&spec, seed)
}

/// A user with well-defined interests: every item of an interest group is
/// relevant, everything else is not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserInterest {
    pub user_id: String,
    pub groups: BTreeSet<String>,
}

/// The five default users with group-aligned interests.
pub fn default_users() -> Vec<UserInterest> {
    let interests: &[(&str, &[&str])] = &[
        ("user1", &["Fruits and Juices"]),
        ("user2", &["Vegetables"]),
        ("user3", &["Breakfast Cereals"]),
        (
            "user4",
            &["Beef Products", "Pork Products", "Poultry Products"],
        ),
        ("user5", &["Sweets", "Snacks"]),
    ];
    interests
        .iter()
        .map(|(id, groups)| UserInterest {
            user_id: (*id).to_owned(),
            groups: groups.iter().map(|g| (*g).to_owned()).collect(),
        })
        .collect()
}

/// Derive ratings from group interests: relevant iff the item's group is
/// one of the user's interest groups.
pub fn generate_ratings(corpus: &Corpus, users: &[UserInterest]) -> Vec<RatingSet> {
    users
        .iter()
        .map(|user| {
            let (relevant, non_relevant) = corpus
                .iter()
                .map(|item| (item.id.clone(), user.groups.contains(&item.group)))
                .partition::<Vec<_>, _>(|(_, relevant)| *relevant);
            RatingSet {
                user_id: user.user_id.clone(),
                relevant: relevant.into_iter().map(|(id, _)| id).collect(),
                non_relevant: non_relevant.into_iter().map(|(id, _)| id).collect(),
            }
        })
        .collect()
}

/// Concept-to-concept links between groups that share a form relation,
/// e.g. fruits have juice as a form.
const FORM_LINKS: &[(&str, &str)] = &[
    ("Fruits and Juices", "Beverages"),
    ("Cereal Grains", "Baked Products"),
    ("Dairy and Egg", "Sweets"),
    ("Vegetables", "Soups and Sauces"),
];

/// Build a concept graph aligned with the synthetic corpus: one class per
/// group whose stems cover the group pool, plus instance concepts for the
/// first half of each pool.
pub fn synthetic_ontology() -> Ontology {
    let mut concepts = Vec::new();
    let mut relations = Vec::new();
    let mut instance_classes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for (group, pool) in GROUP_POOLS {
        let class_id = slug(group);
        let stems: BTreeSet<String> = pool.iter().map(|w| textpipe::stem_word(w)).collect();
        concepts.push(Concept {
            id: class_id.clone(),
            label: (*group).to_owned(),
            kind: ConceptKind::Class,
            stems,
        });
        for word in &pool[..pool.len() / 2] {
            instance_classes
                .entry(slug(word))
                .or_default()
                .insert(class_id.clone());
        }
    }

    for (instance_id, classes) in instance_classes {
        concepts.push(Concept {
            id: instance_id.clone(),
            label: capitalize(&instance_id),
            kind: ConceptKind::Instance,
            stems: BTreeSet::from([textpipe::stem_word(&instance_id)]),
        });
        for class_id in classes {
            relations.push(Relation {
                source: instance_id.clone(),
                kind: "instanceOf".to_owned(),
                target: class_id,
            });
        }
    }

    for (from, to) in FORM_LINKS {
        relations.push(Relation {
            source: slug(from),
            kind: "hasForm".to_owned(),
            target: slug(to),
        });
    }

    let inverses = BTreeMap::from([
        ("instanceOf".to_owned(), "hasInstance".to_owned()),
        ("hasForm".to_owned(), "isFormedBy".to_owned()),
    ]);
    Ontology::new(concepts, relations, inverses)
}
