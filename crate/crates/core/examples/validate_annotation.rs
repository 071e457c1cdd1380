// Checks a few hand-written annotations against the Expert scheme and
// prints every violation with its rule id.

use idwatch::schema::{
    validate_annotation, Annotation, Dataset, DocType, Document, Language, Relevance, SchemaDef,
    SpanLabel, CAUSE, DATE, FACT, QUANTITY,
};

fn document() -> Document {
    Document {
        id: "doc-floods".into(),
        url: "https://news.example.org/floods".into(),
        language: Language::En,
        publication_date: chrono::NaiveDate::from_ymd_opt(2019, 3, 5).unwrap(),
        text: "Floods displaced 500 people in Assam on 4 March, officials said.".into(),
        themes: Default::default(),
        dataset: Dataset::Custom,
    }
}

fn run_example() -> idwatch::Result<String> {
    let doc = document();
    let schema = SchemaDef::expert();
    let fact = SpanLabel::new("f1", FACT, "Relevant fact", 7, 27).with_fact_types(["displaced"]);

    let good = Annotation::new(&doc.id, "annotator-1", Relevance::Relevant, DocType::News)
        .with_span(fact.clone())
        .with_span(SpanLabel::new("c1", CAUSE, "Disaster", 0, 6))
        .with_span(SpanLabel::new("q1", QUANTITY, "Person", 17, 27).with_count(500, None))
        .with_span(SpanLabel::new("t1", DATE, "Date (stock)", 40, 47).with_date("20190304"))
        .with_relation("f1", "c1")
        .with_relation("f1", "q1")
        .with_relation("f1", "t1");

    let bad = Annotation::new(&doc.id, "annotator-2", Relevance::Relevant, DocType::News)
        .with_span(fact)
        .with_span(SpanLabel::new("c1", CAUSE, "Disaster", 0, 6))
        .with_span(SpanLabel::new("t1", DATE, "Date (stock)", 40, 47).with_date("20191340"))
        .with_relation("f1", "t1");

    let mut out = String::new();
    for ann in [&good, &bad] {
        let report = validate_annotation(&doc, ann, &schema)?;
        out.push_str(&format!(
            "{}: {} ({} violation(s))\n",
            ann.annotator_id,
            if report.is_valid() {
                "valid"
            } else {
                "invalid"
            },
            report.violations.len()
        ));
        for v in &report.violations {
            out.push_str(&format!(
                "  {:?} {} {:?}: {}\n",
                v.severity, v.rule_id, v.offending_ids, v.message
            ));
        }
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
