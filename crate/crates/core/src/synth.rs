//! Synthetic event graphs with known duplicates.
//!
//! Originals get a name, description, postal address (mostly a nested node,
//! sometimes a plain literal), price and free-entry flag. Duplicates copy an
//! original and perturb it with typos, case flips and dropped address fields.
//! Output depends only on the options, so a seed always yields the same bytes.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::{Graph, Term, Triple};
use crate::learn::LabelSet;
use crate::vocab::{DS_COMPLIES_WITH, RDF_TYPE, SCHEMA, XSD_BOOLEAN, XSD_DECIMAL};

pub const ENTITY_PREFIX: &str = "https://example.org/synth/event/";
pub const EVENT_SHAPE: &str = "https://example.org/ds/EventShape";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub instances: usize,
    /// Fraction of instances that duplicate another instance.
    pub dup_rate: f64,
    pub seed: u64,
    /// Chance that a word of a duplicated text value gets a typo.
    pub typo_rate: f64,
    /// Chance that a duplicated name is upper- or lowercased entirely.
    pub case_flip_rate: f64,
    /// Chance that each address field of a duplicate is dropped.
    pub drop_rate: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            instances: 100,
            dup_rate: 0.1,
            seed: 0,
            typo_rate: 0.15,
            case_flip_rate: 0.3,
            drop_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub graph: Graph,
    /// Every duplicate pair; all other pairs are distinct entities.
    pub truth: LabelSet,
}

impl SynthOutput {
    pub fn ntriples(&self) -> String {
        self.graph.to_ntriples()
    }

    pub fn truth_csv(&self) -> String {
        let mut buf = Vec::new();
        crate::learn::write_ground_truth(&mut buf, &self.truth).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

const SEASONS: &[&str] = &[
    "Summer", "Winter", "Spring", "Autumn", "Midnight", "Grand", "Little", "Open", "Royal", "Golden", "Northern",
    "Old Town",
];
const CITIES: &[&str] = &[
    "Berlin",
    "Hamburg",
    "Munich",
    "Cologne",
    "Dresden",
    "Leipzig",
    "Bremen",
    "Hanover",
    "Nuremberg",
    "Stuttgart",
    "Freiburg",
    "Kiel",
    "Rostock",
    "Potsdam",
    "Mainz",
    "Bonn",
    "Erfurt",
    "Weimar",
    "Lübeck",
    "Regensburg",
];
const KINDS: &[&str] = &[
    "Music Festival",
    "Jazz Night",
    "Food Market",
    "Film Week",
    "Art Fair",
    "Book Fair",
    "City Marathon",
    "Wine Tasting",
    "Theatre Evening",
    "Craft Market",
    "Light Show",
    "Poetry Slam",
];
const FEATURES: &[&str] = &[
    "live bands",
    "street food",
    "guided tours",
    "family programme",
    "local artists",
    "workshops",
    "night concerts",
    "open-air stages",
    "regional wines",
    "readings",
    "a flea market",
    "fireworks",
];
const STREETS: &[&str] = &[
    "Hauptstraße",
    "Schillerstraße",
    "Goethestraße",
    "Bahnhofstraße",
    "Marktplatz",
    "Lindenallee",
    "Gartenweg",
    "Kirchgasse",
    "Seestraße",
    "Bergstraße",
    "Mühlenweg",
    "Rosenstraße",
];

struct Event {
    name: String,
    description: String,
    street: Option<String>,
    postal: Option<String>,
    locality: Option<String>,
    literal_address: bool,
    price: String,
    free: bool,
}

fn original(rng: &mut ChaCha8Rng, name: String, city: &str, kind: &str) -> Event {
    let mut features: Vec<&str> = FEATURES.choose_multiple(rng, 2).copied().collect();
    features.sort_unstable();
    let free = rng.random_bool(0.3);
    let price = if free { 0 } else { rng.random_range(500..12_000u32) };
    Event {
        name,
        description: format!("{kind} in {city} with {} and {}.", features[0], features[1]),
        street: Some(format!(
            "{} {}",
            STREETS.choose(rng).expect("non-empty"),
            rng.random_range(1..120u32)
        )),
        postal: Some(format!("{:05}", rng.random_range(1_000..99_999u32))),
        locality: Some(city.to_string()),
        literal_address: rng.random_bool(0.2),
        price: format!("{}.{:02}", price / 100, price % 100),
        free,
    }
}

fn typo(rng: &mut ChaCha8Rng, word: &str) -> String {
    let mut chars: Vec<char> = word.chars().collect();
    if chars.len() < 2 {
        return word.to_string();
    }
    let i = rng.random_range(0..chars.len() - 1);
    match rng.random_range(0..4u8) {
        0 => chars.swap(i, i + 1),
        1 => {
            chars.remove(i);
        }
        2 => chars.insert(i, chars[i]),
        _ => chars[i] = (b'a' + rng.random_range(0..26u8)) as char,
    }
    chars.into_iter().collect()
}

fn perturb_text(rng: &mut ChaCha8Rng, text: &str, rate: f64) -> String {
    text.split(' ')
        .map(|w| {
            if rng.random_bool(rate) {
                typo(rng, w)
            } else {
                w.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn duplicate(rng: &mut ChaCha8Rng, e: &Event, opts: &SynthOptions) -> Event {
    let mut name = perturb_text(rng, &e.name, opts.typo_rate);
    if rng.random_bool(opts.case_flip_rate) {
        name = if rng.random_bool(0.5) {
            name.to_uppercase()
        } else {
            name.to_lowercase()
        };
    }
    let mut keep = |v: &Option<String>| v.clone().filter(|_| !rng.random_bool(opts.drop_rate));
    let street = keep(&e.street);
    let postal = keep(&e.postal);
    let locality = keep(&e.locality);
    Event {
        name,
        description: perturb_text(rng, &e.description, opts.typo_rate),
        street,
        postal,
        locality,
        literal_address: e.literal_address,
        price: e.price.clone(),
        free: e.free,
    }
}

fn emit(g: &mut Graph, id: &str, n: usize, e: &Event) {
    let s = Term::iri(id);
    let p = |local: &str| format!("{SCHEMA}{local}");
    let mut add = |pred: String, o: Term| {
        g.insert(Triple::new(s.clone(), pred, o));
    };
    add(RDF_TYPE.to_string(), Term::iri(format!("{SCHEMA}Event")));
    add(DS_COMPLIES_WITH.to_string(), Term::iri(EVENT_SHAPE));
    add(p("name"), Term::literal(e.name.clone()));
    add(p("description"), Term::literal(e.description.clone()));
    add(p("price"), Term::typed(e.price.clone(), XSD_DECIMAL));
    add(p("isAccessibleForFree"), Term::typed(e.free.to_string(), XSD_BOOLEAN));
    let parts: Vec<(&str, &Option<String>)> = vec![
        ("streetAddress", &e.street),
        ("postalCode", &e.postal),
        ("addressLocality", &e.locality),
    ];
    if e.literal_address {
        let text: Vec<&str> = parts.iter().filter_map(|(_, v)| v.as_deref()).collect();
        if !text.is_empty() {
            add(p("address"), Term::literal(text.join(", ")));
        }
        return;
    }
    let node = Term::blank(format!("addr{n}"));
    add(p("address"), node.clone());
    for (local, v) in parts {
        if let Some(v) = v {
            g.insert(Triple::new(node.clone(), p(local), Term::literal(v.clone())));
        }
    }
}

/// Generates `opts.instances` events of which `round(instances * dup_rate)`
/// duplicate a distinct original.
pub fn synth(opts: &SynthOptions) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let n = opts.instances;
    let dups = ((n as f64 * opts.dup_rate.clamp(0.0, 0.5)).round() as usize).min(n / 2);
    let originals = n - dups;

    let mut combos: Vec<(usize, usize, usize)> = (0..SEASONS.len())
        .flat_map(|a| (0..CITIES.len()).flat_map(move |b| (0..KINDS.len()).map(move |c| (a, b, c))))
        .collect();
    combos.shuffle(&mut rng);
    let mut events: Vec<Event> = (0..originals)
        .map(|i| {
            let (a, b, c) = combos[i % combos.len()];
            let mut name = format!("{} {} {}", SEASONS[a], CITIES[b], KINDS[c]);
            if i >= combos.len() {
                name.push_str(&format!(" {}", 2000 + i / combos.len()));
            }
            original(&mut rng, name, CITIES[b], KINDS[c])
        })
        .collect();
    let mut sources: Vec<usize> = (0..originals).collect();
    sources.shuffle(&mut rng);
    sources.truncate(dups);
    sources.sort_unstable();
    for &src in &sources {
        let d = duplicate(&mut rng, &events[src], opts);
        events.push(d);
    }

    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut rng);
    let iri = |event: usize| format!("{ENTITY_PREFIX}{:05}", slots[event]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&e| slots[e]);
    let mut graph = Graph::new();
    for e in order {
        emit(&mut graph, &iri(e), slots[e], &events[e]);
    }
    let mut truth = LabelSet::new();
    for (k, &src) in sources.iter().enumerate() {
        truth.insert(&iri(src), &iri(originals + k), true);
    }
    SynthOutput { graph, truth }
}
