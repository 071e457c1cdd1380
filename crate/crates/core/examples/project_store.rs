// A project directory from creation to export: documents, consensus
// assignments, initial and review submissions, round selection.

use idwatch::schema::{DocType, Round};
use idwatch::store::{import_annotations, ExportFilter, Project, RoundSelector, Store};
use idwatch::synth::consensus_fixture;

fn run_example() -> idwatch::Result<String> {
    let dir = tempfile::tempdir().map_err(|source| idwatch::Error::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let fx = consensus_fixture(10, 3, 0.2, 1);

    let mut project = Project::new("floods-2019", "Floods 2019");
    project.annotators = fx.annotators.clone();
    project.consensus_fraction = 0.3;
    project.annotators_per_consensus_doc = 3;
    let mut store = Store::create(dir.path(), project)?;
    store.add_documents(&fx.documents)?;
    let assignments = store.assign_unassigned(42)?;
    let mut out = format!(
        "{} documents, {} assignments\n",
        fx.documents.len(),
        assignments.len()
    );

    for a in &assignments {
        if let Some(ann) = fx
            .annotations
            .iter()
            .find(|x| x.document_id == a.document_id && x.annotator_id == a.annotator_id)
        {
            store.submit(ann.clone())?;
        }
    }
    let first = store.history()[0].annotation.clone();
    let mut review = first.clone().with_round(Round::Review);
    review.doc_type = Some(DocType::Both);
    let review_id = store.submit(review)?;
    out.push_str(&format!(
        "history {} entries; current {}; initial round {}; review {review_id} current: {}\n",
        store.history().len(),
        store.annotations(RoundSelector::Current).len(),
        store.annotations(RoundSelector::Initial).len(),
        store.is_current(&review_id)
    ));

    let mut buf = Vec::new();
    let n = store.export(&ExportFilter::default(), &mut buf)?;
    let (header, back) = import_annotations(buf.as_slice())?;
    out.push_str(&format!(
        "exported {n}, re-imported {} ({} v{})\n",
        back.len(),
        header.format,
        header.version
    ));

    let reopened = Store::open(dir.path())?;
    out.push_str(&format!(
        "reopened with {} annotations\n",
        reopened.history().len()
    ));
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
