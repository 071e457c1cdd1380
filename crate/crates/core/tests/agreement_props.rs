use proptest::prelude::*;

use idwatch::agreement::{
    agreement_report, alpha, consensus_items, store_report, AgreementConfig, AlphaMode, Distance,
    ReliabilityData,
};
use idwatch::schema::SchemaDef;
use idwatch::store::{Project, RoundSelector, Store};
use idwatch::synth::consensus_fixture;

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<Option<u8>>>> {
    prop::collection::vec(prop::collection::vec(prop::option::of(0u8..4), 3), 2..40)
}

fn as_data(rows: &[Vec<Option<u8>>]) -> ReliabilityData {
    let owned: Vec<Vec<Option<String>>> = rows
        .iter()
        .map(|r| r.iter().map(|v| v.map(|x| format!("v{x}"))).collect())
        .collect();
    let borrowed: Vec<Vec<Option<&str>>> = owned
        .iter()
        .map(|r| r.iter().map(|v| v.as_deref()).collect())
        .collect();
    ReliabilityData::from_rows(Distance::Nominal, &borrowed)
}

proptest! {
    #[test]
    fn alpha_ignores_unit_and_coder_order(rows in rows_strategy(), rot in 0usize..3) {
        let Ok(base) = alpha(&as_data(&rows)) else { return Ok(()) };
        let mut shuffled: Vec<Vec<Option<u8>>> = rows.iter().rev().cloned().collect();
        for r in &mut shuffled {
            r.rotate_left(rot);
        }
        let other = alpha(&as_data(&shuffled)).unwrap();
        prop_assert!((base.alpha - other.alpha).abs() < 1e-12 || (base.alpha.is_nan() && other.alpha.is_nan()));
        prop_assert_eq!(base.degenerate, other.degenerate);
    }

    #[test]
    fn alpha_never_exceeds_one(rows in rows_strategy()) {
        if let Ok(s) = alpha(&as_data(&rows)) {
            prop_assert!(s.alpha <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn store_report_matches_direct_report() {
    let fx = consensus_fixture(15, 3, 0.2, 8);
    let dir = tempfile::tempdir().unwrap();
    let mut project = Project::new("p", "p");
    project.annotators = fx.annotators.clone();
    project.consensus_fraction = 1.0;
    project.annotators_per_consensus_doc = 3;
    let mut store = Store::create(dir.path(), project).unwrap();
    store.add_documents(&fx.documents).unwrap();
    store.assign_unassigned(1).unwrap();
    for a in &fx.annotations {
        store.submit(a.clone()).unwrap();
    }
    let config = AgreementConfig::default();
    let via_store = store_report(&store, RoundSelector::Current, &config).unwrap();
    let refs = fx.annotation_refs();
    let items = consensus_items(&fx.documents, &refs).unwrap();
    let direct = agreement_report(&items, &SchemaDef::expert(), "current", &config);
    assert_eq!(via_store.rows.len(), direct.rows.len());
    for (a, b) in via_store.rows.iter().zip(&direct.rows) {
        assert_eq!(a.task, b.task);
        for mode in AlphaMode::ALL {
            assert_eq!(a.cell(mode), b.cell(mode), "{} {:?}", a.task, mode);
        }
    }
}
