// Per-task agreement on synthetic consensus annotations, first with
// identical annotators and then with label noise.

use idwatch::agreement::{agreement_report, consensus_items, AgreementConfig};
use idwatch::schema::SchemaDef;
use idwatch::synth::consensus_fixture;

fn run_example() -> idwatch::Result<String> {
    let mut out = String::new();
    for noise in [0.0, 0.3] {
        let fx = consensus_fixture(40, 3, noise, 5);
        let refs = fx.annotation_refs();
        let items = consensus_items(&fx.documents, &refs)?;
        let report = agreement_report(
            &items,
            &SchemaDef::expert(),
            "current",
            &AgreementConfig::default(),
        );
        out.push_str(&format!("noise {noise}\n{}\n", report.render()));
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
