//! Article retrieval through an injectable [`Fetcher`] and main-text
//! extraction from the returned HTML.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, NaiveDate};
use scraper::{ElementRef, Html, Selector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FetchFailure, Result};

/// Raw response handed back by a fetcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FetchedPage {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: String,
}

impl FetchedPage {
    pub fn html(body: impl Into<String>) -> Self {
        FetchedPage {
            status: 200,
            content_type: Some("text/html; charset=utf-8".to_string()),
            body: body.into(),
        }
    }

    pub fn status(status: u16) -> Self {
        FetchedPage {
            status,
            content_type: None,
            body: String::new(),
        }
    }
}

/// Maps a URL to a raw page. Implementations decide transport.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, url: &str) -> std::result::Result<FetchedPage, FetchFailure>;
}

impl<F> Fetcher for F
where
    F: Fn(&str) -> std::result::Result<FetchedPage, FetchFailure> + Send + Sync,
{
    fn fetch(&self, url: &str) -> std::result::Result<FetchedPage, FetchFailure> {
        self(url)
    }
}

/// In-memory fetcher; unknown URLs answer 404.
#[derive(Debug, Clone, Default)]
pub struct StaticFetcher {
    pages: HashMap<String, FetchedPage>,
}

impl StaticFetcher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_page(mut self, url: impl Into<String>, page: FetchedPage) -> Self {
        self.pages.insert(url.into(), page);
        self
    }
}

impl Fetcher for StaticFetcher {
    fn fetch(&self, url: &str) -> std::result::Result<FetchedPage, FetchFailure> {
        Ok(self
            .pages
            .get(url)
            .cloned()
            .unwrap_or(FetchedPage::status(404)))
    }
}

/// Offline snapshot: a directory with `index.json` mapping URLs to HTML
/// files stored next to it. URLs absent from the index answer 404.
#[derive(Debug, Clone)]
pub struct SnapshotFetcher {
    root: PathBuf,
    index: BTreeMap<String, String>,
}

impl SnapshotFetcher {
    pub fn open(root: &Path) -> Result<Self> {
        let index_path = root.join("index.json");
        let text = std::fs::read_to_string(&index_path).map_err(|e| Error::io(&index_path, e))?;
        Ok(SnapshotFetcher {
            root: root.to_path_buf(),
            index: serde_json::from_str(&text)?,
        })
    }
}

impl Fetcher for SnapshotFetcher {
    fn fetch(&self, url: &str) -> std::result::Result<FetchedPage, FetchFailure> {
        let Some(file) = self.index.get(url) else {
            return Ok(FetchedPage::status(404));
        };
        let path = self.root.join(file);
        let body = std::fs::read_to_string(&path).map_err(|e| FetchFailure::Network {
            message: format!("{}: {e}", path.display()),
        })?;
        let content_type = match path.extension().and_then(|e| e.to_str()) {
            Some("html" | "htm") => "text/html",
            Some("json") => "application/json",
            _ => "application/octet-stream",
        };
        Ok(FetchedPage {
            status: 200,
            content_type: Some(content_type.to_string()),
            body,
        })
    }
}

/// Extracted article text plus the publication date when the page states one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentDraft {
    pub url: String,
    pub text: String,
    pub publication_date: Option<NaiveDate>,
}

pub fn fetch_article(url: &str, fetcher: &dyn Fetcher) -> Result<DocumentDraft> {
    let fail = |reason| Error::Fetch {
        url: url.to_string(),
        reason,
    };
    let page = fetcher.fetch(url).map_err(fail)?;
    if !(200..300).contains(&page.status) {
        return Err(fail(FetchFailure::Status {
            status: page.status,
        }));
    }
    match &page.content_type {
        Some(ct) if !ct.to_ascii_lowercase().contains("html") => {
            return Err(fail(FetchFailure::NotHtml {
                content_type: ct.clone(),
            }))
        }
        None if !page.body.trim_start().starts_with('<') => {
            return Err(fail(FetchFailure::NotHtml {
                content_type: "unknown".to_string(),
            }))
        }
        _ => {}
    }
    let html = Html::parse_document(&page.body);
    let text = extract_main_text(&html);
    if text.is_empty() {
        return Err(fail(FetchFailure::EmptyExtraction));
    }
    Ok(DocumentDraft {
        url: url.to_string(),
        text,
        publication_date: published_date(&html),
    })
}

/// Fetches every URL with at most `limit` requests in flight. Results keep
/// the input order.
pub fn fetch_all(
    urls: &[String],
    fetcher: &dyn Fetcher,
    limit: usize,
) -> Vec<Result<DocumentDraft>> {
    let slots: Vec<Mutex<Option<Result<DocumentDraft>>>> =
        urls.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = limit.max(1).min(urls.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= urls.len() {
                    break;
                }
                let result = fetch_article(&urls[i], fetcher);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

const BOILERPLATE: &[&str] = &[
    "script",
    "style",
    "noscript",
    "nav",
    "header",
    "footer",
    "aside",
    "form",
    "button",
    "figcaption",
    "template",
];

fn in_boilerplate(el: &ElementRef<'_>) -> bool {
    el.ancestors()
        .filter_map(|n| n.value().as_element())
        .any(|e| BOILERPLATE.contains(&e.name()))
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Picks the container holding the most paragraph text and joins its
/// paragraphs. Pages without `<p>` fall back to all visible body text.
pub fn extract_main_text(html: &Html) -> String {
    let p_sel = Selector::parse("p").expect("static selector");
    let mut blocks = Vec::new();
    for p in html.select(&p_sel) {
        if in_boilerplate(&p) {
            continue;
        }
        let text = normalize_ws(&p.text().collect::<String>());
        if text.is_empty() {
            continue;
        }
        let parent = p.parent().map(|n| n.id());
        let len = text.chars().count();
        match blocks
            .iter_mut()
            .find(|(id, _, _): &&mut (_, Vec<String>, usize)| *id == parent)
        {
            Some((_, paras, total)) => {
                paras.push(text);
                *total += len;
            }
            None => blocks.push((parent, vec![text], len)),
        }
    }
    // first block wins ties
    let best =
        blocks.into_iter().fold(
            None::<(Vec<String>, usize)>,
            |acc, (_, paras, total)| match acc {
                Some((_, best)) if best >= total => acc,
                _ => Some((paras, total)),
            },
        );
    if let Some((paras, _)) = best {
        return paras.join("\n\n");
    }

    let body_sel = Selector::parse("body").expect("static selector");
    let Some(body) = html.select(&body_sel).next() else {
        return String::new();
    };
    let mut parts = Vec::new();
    for node in body.descendants() {
        if let Some(t) = node.value().as_text() {
            let skip = node
                .ancestors()
                .filter_map(|n| n.value().as_element())
                .any(|e| BOILERPLATE.contains(&e.name()));
            if !skip {
                parts.push(t.to_string());
            }
        }
    }
    normalize_ws(&parts.join(" "))
}

const DATE_META_KEYS: &[&str] = &[
    "article:published_time",
    "og:published_time",
    "published-date",
    "published_date",
    "publishdate",
    "publish-date",
    "pubdate",
    "date",
    "dc.date.issued",
    "dc.date",
    "datepublished",
    "parsely-pub-date",
    "sailthru.date",
];

/// Reads the publication date from meta tags or a `datePublished` time
/// element.
pub fn published_date(html: &Html) -> Option<NaiveDate> {
    let meta_sel = Selector::parse("meta").expect("static selector");
    for meta in html.select(&meta_sel) {
        let el = meta.value();
        let key = ["property", "name", "itemprop"]
            .iter()
            .find_map(|a| el.attr(a))
            .map(str::to_ascii_lowercase);
        if key.as_deref().is_some_and(|k| DATE_META_KEYS.contains(&k)) {
            if let Some(date) = el.attr("content").and_then(parse_date) {
                return Some(date);
            }
        }
    }
    let time_sel = Selector::parse("time[itemprop=datePublished]").expect("static selector");
    html.select(&time_sel)
        .find_map(|t| t.value().attr("datetime").and_then(parse_date))
}

fn parse_date(value: &str) -> Option<NaiveDate> {
    let v = value.trim();
    if let Some(d) = v
        .get(..10)
        .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok())
    {
        return Some(d);
    }
    if let Some(d) = v
        .get(..8)
        .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|s| NaiveDate::parse_from_str(s, "%Y%m%d").ok())
    {
        return Some(d);
    }
    DateTime::parse_from_rfc2822(v).ok().map(|d| d.date_naive())
}
