//! Seeded synthetic data: labeled corpora for the classifiers and
//! multiply-annotated documents for the agreement reports.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schema::{
    Annotation, Dataset, DocType, Document, Language, Relevance, SpanLabel, CAUSE, DATE, FACT,
    LOCATION_ORIGIN, QUANTITY,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub texts: Vec<String>,
    pub labels: Vec<bool>,
}

const FILLER: [&str; 40] = [
    "the",
    "report",
    "said",
    "officials",
    "local",
    "region",
    "week",
    "people",
    "area",
    "according",
    "government",
    "statement",
    "on",
    "monday",
    "tuesday",
    "city",
    "province",
    "district",
    "news",
    "agency",
    "published",
    "update",
    "residents",
    "community",
    "several",
    "hundreds",
    "since",
    "early",
    "morning",
    "late",
    "night",
    "around",
    "village",
    "national",
    "authorities",
    "confirmed",
    "sources",
    "media",
    "regional",
    "office",
];

const POSITIVE: [&str; 16] = [
    "flood",
    "evacuated",
    "displaced",
    "shelter",
    "camp",
    "fled",
    "homeless",
    "relief",
    "rescue",
    "storm",
    "cyclone",
    "landslide",
    "refugees",
    "stranded",
    "destroyed",
    "homes",
];

const NEGATIVE: [&str; 16] = [
    "election",
    "market",
    "football",
    "tournament",
    "stocks",
    "concert",
    "festival",
    "budget",
    "parliament",
    "investors",
    "league",
    "album",
    "tariff",
    "championship",
    "earnings",
    "campaign",
];

fn sentence(rng: &mut ChaCha8Rng, pool: &[&str], markers: usize) -> String {
    let mut words: Vec<&str> = (0..12)
        .map(|_| *FILLER.choose(rng).expect("non-empty"))
        .collect();
    for _ in 0..markers {
        words.push(pool.choose(rng).expect("non-empty"));
    }
    words.shuffle(rng);
    words.join(" ")
}

/// Balanced corpus whose classes use disjoint marker vocabularies.
pub fn separable_corpus(n: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut texts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let positive = i % 2 == 0;
        let pool: &[&str] = if positive { &POSITIVE } else { &NEGATIVE };
        let body: Vec<String> = (0..3).map(|_| sentence(&mut rng, pool, 3)).collect();
        texts.push(body.join(". ") + ".");
        labels.push(positive);
    }
    SyntheticCorpus { texts, labels }
}

/// The separable corpus with its labels permuted by a seeded shuffle, so
/// labels carry no information about the text.
pub fn shuffled_corpus(n: usize, seed: u64) -> SyntheticCorpus {
    let mut corpus = separable_corpus(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    corpus.labels.shuffle(&mut rng);
    corpus
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusFixture {
    pub documents: Vec<Document>,
    pub annotations: Vec<Annotation>,
    pub annotators: Vec<String>,
}

impl ConsensusFixture {
    pub fn annotation_refs(&self) -> Vec<&Annotation> {
        self.annotations.iter().collect()
    }
}

fn document(id: String, text: String) -> Document {
    Document {
        url: format!("https://example.org/news/{id}"),
        id,
        language: Language::En,
        publication_date: NaiveDate::from_ymd_opt(2019, 3, 5).expect("valid date"),
        text,
        themes: ["DISPLACED".to_string()].into_iter().collect(),
        dataset: Dataset::Custom,
    }
}

/// Text assembled piece by piece, remembering code-point extents.
struct TextBuilder {
    text: String,
    len: usize,
}

impl TextBuilder {
    fn push(&mut self, piece: &str) -> (usize, usize) {
        let start = self.len;
        self.text.push_str(piece);
        self.len += piece.chars().count();
        (start, self.len)
    }
}

struct Truth {
    relevant: bool,
    doc_type: DocType,
    cause: &'static str,
    cause_first: (usize, usize),
    cause_second: (usize, usize),
    fact: (usize, usize),
    fact_type: &'static str,
    quantity: (usize, usize),
    count: u64,
    place: (usize, usize),
    date: (usize, usize),
    date_value: String,
}

const CAUSES: [(&str, &str); 4] = [
    ("heavy flooding", "Disaster"),
    ("armed clashes", "Conflict"),
    ("a powerful cyclone", "Disaster"),
    ("forced evictions", "Other cause"),
];
const PLACES: [&str; 5] = ["Sylhet", "Beira", "Maiduguri", "Assam", "Kasai"];
const FACT_TYPES: [&str; 4] = ["displaced", "evacuated", "homeless", "in relief camp"];

fn compose(rng: &mut ChaCha8Rng) -> (String, Truth) {
    let (cause_text, cause) = *CAUSES.choose(rng).expect("non-empty");
    let place = *PLACES.choose(rng).expect("non-empty");
    let count = rng.random_range(2..90u64) * 100;
    let day = rng.random_range(1..28u32);
    let mut b = TextBuilder {
        text: String::new(),
        len: 0,
    };
    b.push("Officials in ");
    let place_ext = b.push(place);
    b.push(" said ");
    let cause_first = b.push(cause_text);
    b.push(" struck on ");
    let date_ext = b.push(&format!("{day} March 2019"));
    b.push(". ");
    let quantity = b.push(&format!("{count} people"));
    b.push(" ");
    let fact = b.push("were forced from their homes");
    b.push(" and many remain in shelters. Aid workers confirmed that ");
    let cause_second = b.push(cause_text);
    b.push(" had cut roads across the region, and further help is expected this week.");
    let doc_type = *[
        DocType::News,
        DocType::News,
        DocType::Summary,
        DocType::Both,
    ]
    .choose(rng)
    .expect("non-empty");
    let truth = Truth {
        relevant: rng.random_bool(0.65),
        doc_type,
        cause,
        cause_first,
        cause_second,
        fact,
        fact_type: FACT_TYPES.choose(rng).expect("non-empty"),
        quantity,
        count,
        place: place_ext,
        date: date_ext,
        date_value: format!("201903{day:02}"),
    };
    (b.text, truth)
}

fn other<T: Copy + PartialEq>(rng: &mut ChaCha8Rng, options: &[T], not: T) -> T {
    let rest: Vec<T> = options.iter().copied().filter(|o| *o != not).collect();
    *rest.choose(rng).expect("at least two options")
}

fn annotate(
    rng: &mut ChaCha8Rng,
    doc: &Document,
    who: &str,
    truth: &Truth,
    noise: f64,
) -> Annotation {
    let relevant = if rng.random_bool(noise / 2.0) {
        !truth.relevant
    } else {
        truth.relevant
    };
    if !relevant {
        return Annotation::new(&doc.id, who, Relevance::NotRelevant, DocType::NotApplicable);
    }
    let doc_type = if rng.random_bool(noise) {
        other(
            rng,
            &[DocType::News, DocType::Summary, DocType::Both],
            truth.doc_type,
        )
    } else {
        truth.doc_type
    };
    let mut ann = Annotation::new(&doc.id, who, Relevance::Relevant, doc_type);

    let fact_type = if rng.random_bool(noise) {
        other(rng, &FACT_TYPES, truth.fact_type)
    } else {
        truth.fact_type
    };
    ann.spans.push(
        SpanLabel::new("f1", FACT, "Relevant fact", truth.fact.0, truth.fact.1)
            .with_fact_types([fact_type]),
    );

    if !rng.random_bool(noise / 2.0) {
        let label = if rng.random_bool(noise) {
            other(rng, &["Conflict", "Disaster", "Other cause"], truth.cause)
        } else {
            truth.cause
        };
        // Either mention of the cause is a correct choice.
        let ext = if rng.random_bool(noise) {
            truth.cause_second
        } else {
            truth.cause_first
        };
        ann.spans
            .push(SpanLabel::new("c1", CAUSE, label, ext.0, ext.1));
    }
    if !rng.random_bool(noise / 2.0) {
        let label = if rng.random_bool(noise) {
            "Household"
        } else {
            "Person"
        };
        let end = if rng.random_bool(noise) {
            truth.quantity.1 - 7
        } else {
            truth.quantity.1
        };
        ann.spans.push(
            SpanLabel::new("q1", QUANTITY, label, truth.quantity.0, end)
                .with_count(truth.count, Some("about")),
        );
    }
    if !rng.random_bool(noise / 2.0) {
        let label = if rng.random_bool(noise) {
            "State/District/Region"
        } else {
            "County/City/Village/Town/Hamlet"
        };
        ann.spans.push(SpanLabel::new(
            "l1",
            LOCATION_ORIGIN,
            label,
            truth.place.0,
            truth.place.1,
        ));
    }
    if !rng.random_bool(noise / 2.0) {
        let label = if rng.random_bool(noise) {
            "Start Date (flow)"
        } else {
            "Date (stock)"
        };
        ann.spans.push(
            SpanLabel::new("t1", DATE, label, truth.date.0, truth.date.1)
                .with_date(&truth.date_value),
        );
    }
    let targets: Vec<String> = ann
        .spans
        .iter()
        .filter(|s| !s.is_fact())
        .map(|s| s.id.clone())
        .collect();
    for t in targets {
        ann = ann.with_relation("f1", &t);
    }
    ann
}

/// Documents each annotated by every annotator. `noise` is the chance an
/// annotator departs from the underlying truth on any single decision; at
/// zero the annotations are unanimous. Every annotation passes validation
/// against the bundled expert scheme.
pub fn consensus_fixture(
    n_docs: usize,
    n_annotators: usize,
    noise: f64,
    seed: u64,
) -> ConsensusFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let annotators: Vec<String> = (0..n_annotators)
        .map(|i| format!("annotator-{}", i + 1))
        .collect();
    let mut documents = Vec::with_capacity(n_docs);
    let mut annotations = Vec::new();
    for i in 0..n_docs {
        let (text, truth) = compose(&mut rng);
        let doc = document(format!("doc-synth-{i:04}"), text);
        for who in &annotators {
            annotations.push(annotate(&mut rng, &doc, who, &truth, noise));
        }
        documents.push(doc);
    }
    ConsensusFixture {
        documents,
        annotations,
        annotators,
    }
}

/// Single-annotator style fixture whose majority-resolved classes come to
/// 91 Relevant and 102 Not Relevant documents, and to 62 News, 24 Summary
/// and 9 Both among the documents not resolved as Not Relevant.
///
/// Four documents carry a relevance tie but an agreed News type, which is
/// why the type set (95) is larger than the relevant set (91).
pub fn class_count_fixture() -> ConsensusFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let mut documents = Vec::new();
    let mut annotations = Vec::new();
    let mut add = |rng: &mut ChaCha8Rng, votes: &[(Relevance, DocType)]| {
        let (text, _) = compose(rng);
        let doc = document(format!("doc-count-{:04}", documents.len()), text);
        for (k, (r, t)) in votes.iter().enumerate() {
            annotations.push(Annotation::new(
                &doc.id,
                format!("annotator-{}", k + 1),
                *r,
                *t,
            ));
        }
        documents.push(doc);
    };
    let rel = Relevance::Relevant;
    let plan: [(usize, DocType); 3] = [
        (58, DocType::News),
        (24, DocType::Summary),
        (9, DocType::Both),
    ];
    for (n, t) in plan {
        for _ in 0..n {
            add(&mut rng, &[(rel, t)]);
        }
    }
    for _ in 0..4 {
        add(
            &mut rng,
            &[
                (rel, DocType::News),
                (Relevance::NotRelevant, DocType::News),
            ],
        );
    }
    for _ in 0..102 {
        add(
            &mut rng,
            &[(Relevance::NotRelevant, DocType::NotApplicable)],
        );
    }
    ConsensusFixture {
        documents,
        annotations,
        annotators: vec!["annotator-1".into(), "annotator-2".into()],
    }
}

/// Distinct texts of a fixture, for quick sanity checks.
pub fn distinct_texts(fixture: &ConsensusFixture) -> usize {
    fixture
        .documents
        .iter()
        .map(|d| d.text.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}
