// Two annotators mark Cause spans on the same sentence; alignment pairs
// overlapping spans first and then similar non-overlapping ones.

use idwatch::agreement::align_spans;
use idwatch::schema::{Annotation, DocType, Relevance, SpanLabel, CAUSE};

const TEXT: &str =
    "Heavy rains caused floods in the north. Later, heavy rains caused floods in the south.";

fn run_example() -> idwatch::Result<String> {
    let a = Annotation::new("doc-1", "annotator-1", Relevance::Relevant, DocType::News)
        .with_span(SpanLabel::new("c1", CAUSE, "Disaster", 0, 25))
        .with_span(SpanLabel::new("c2", CAUSE, "Disaster", 29, 38));
    let b = Annotation::new("doc-1", "annotator-2", Relevance::Relevant, DocType::News)
        .with_span(SpanLabel::new("c1", CAUSE, "Disaster", 26, 38))
        .with_span(SpanLabel::new("c2", CAUSE, "Disaster", 47, 72));

    let mut out = String::new();
    for pair in align_spans(TEXT, &a, &b, CAUSE, 0.8)? {
        let (x, y) = (&pair.span_a, &pair.span_b);
        out.push_str(&format!(
            "{:?} {:?} [{}..{}] {:?} <-> {:?} [{}..{}] {:?}",
            pair.basis,
            x.label,
            x.start,
            x.end,
            &TEXT[x.start..x.end],
            y.label,
            y.start,
            y.end,
            &TEXT[y.start..y.end]
        ));
        if let Some(s) = pair.similarity_score {
            out.push_str(&format!(" similarity {s:.2}"));
        }
        out.push('\n');
    }
    Ok(out)
}

fn main() {
    match run_example() {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
