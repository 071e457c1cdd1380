// Crowd labels: reads a worker CSV, maps each merged label to the Expert
// Relevance/Type pair and resolves the majority per document.

use std::collections::BTreeMap;

use idwatch::schema::{crowd_to_expert, read_crowd_csv, resolve_majority, Majority};

const CSV: &str = "document_id,worker_id,label
doc-1,w1,Relevant – News
doc-1,w2,Relevant – News
doc-1,w3,Relevant – Summary
doc-2,w1,Not Relevant
doc-2,w4,Relevant – Both
doc-3,w2,Relevant – Summary
doc-3,w3,Relevant – Summary
doc-3,w5,Relevant – Summary
";

fn run_example() -> idwatch::Result<String> {
    let labels = read_crowd_csv(CSV.as_bytes())?;
    let mut out = String::new();
    let mut by_doc: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for l in &labels {
        let (relevance, doc_type) = crowd_to_expert(l.label);
        out.push_str(&format!(
            "{} {} {:<12} -> {:?} / {:?}\n",
            l.document_id,
            l.worker_id,
            l.label.as_str(),
            relevance,
            doc_type
        ));
        by_doc.entry(&l.document_id).or_default().push(l.label);
    }
    for (doc, votes) in by_doc {
        let verdict = match resolve_majority(&votes) {
            Majority::Decided(v) => v.as_str().to_string(),
            other => format!("{other:?}"),
        };
        out.push_str(&format!("{doc}: {verdict}\n"));
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
