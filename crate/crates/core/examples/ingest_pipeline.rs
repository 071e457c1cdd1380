// Acquisition end to end on canned pages: theme filter, fetch, keyword
// filter, theme statistics and a seeded yearly sample.

use chrono::NaiveDate;

use idwatch::ingestion::{
    default_themes, ingest, sample_period, theme_stats, FetchedPage, GdeltRecord, IngestConfig,
    StaticFetcher,
};

fn record(url: &str, themes: &[&str], date: (i32, u32, u32)) -> GdeltRecord {
    GdeltRecord {
        url: url.to_string(),
        themes: themes.iter().map(|t| t.to_string()).collect(),
        detected_language: "en".to_string(),
        record_date: NaiveDate::from_ymd_opt(date.0, date.1, date.2).unwrap(),
    }
}

fn page(title: &str, body: &str, published: &str) -> FetchedPage {
    FetchedPage::html(format!(
        "<html><head><title>{title}</title><meta name=\"published-date\" content=\"{published}\"></head>\
         <body><article><h1>{title}</h1><p>{body}</p></article></body></html>"
    ))
}

fn run_example() -> idwatch::Result<String> {
    let records = vec![
        record(
            "https://news.example.org/floods",
            &["DISPLACED", "NATURAL_DISASTER_FLOODS"],
            (2019, 3, 4),
        ),
        record(
            "https://news.example.org/cup-final",
            &["SPORTS"],
            (2019, 3, 5),
        ),
        record(
            "https://wire.example.com/quake",
            &["EVACUATION", "EVACUATION"],
            (2019, 6, 1),
        ),
        record(
            "https://wire.example.com/market",
            &["DISPLACED"],
            (2019, 7, 9),
        ),
        record(
            "https://news.example.org/floods",
            &["DISPLACED"],
            (2019, 3, 4),
        ),
    ];
    let fetcher = StaticFetcher::new()
        .with_page(
            "https://news.example.org/floods",
            page(
                "Floods",
                "Floods displaced 500 people in Assam, officials said.",
                "2019-03-04",
            ),
        )
        .with_page(
            "https://wire.example.com/quake",
            page(
                "Quake",
                "Thousands were evacuated from coastal towns after the quake.",
                "2019-06-01",
            ),
        )
        .with_page(
            "https://wire.example.com/market",
            page(
                "Markets",
                "Share prices rose for a third day.",
                "2019-07-09",
            ),
        );

    let outcome = ingest(&records, &fetcher, &IngestConfig::default());
    let mut out = format!(
        "kept {} of {} records (off theme {}, duplicate url {}, no keyword {}, fetch failures {})\n",
        outcome.documents.len(),
        records.len(),
        outcome.off_theme,
        outcome.duplicate_url,
        outcome.no_keyword,
        outcome.failures.len()
    );
    for doc in &outcome.documents {
        out.push_str(&format!(
            "  {} {} {}\n",
            doc.id, doc.publication_date, doc.url
        ));
    }

    out.push_str(&theme_stats(&records, Some(&default_themes())).render());

    let sample = sample_period(&outcome.documents, 2019, 1, 7)?;
    out.push_str(&format!("sample of 1 from 2019: {}\n", sample[0].url));
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
