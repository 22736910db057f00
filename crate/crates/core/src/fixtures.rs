//! A synthetic page corpus and a local origin server that serves it.
//!
//! Used by the test suite, the examples and `clearlens eval` dry runs. Every
//! corpus page links at least two external stylesheets and one script, and
//! carries inline styles, presentational attributes, wrapper elements and a
//! mix of link kinds.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use axum::body::Body;
use axum::extract::{Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

use crate::eval::LabeledUrl;
use crate::fetcher::SourceUrl;

/// Number of pages in [`corpus`].
pub const CORPUS_SIZE: usize = 20;

/// A page with only absolute links, so it transforms identically whether it
/// is read from disk or served by the origin.
pub const STANDALONE_PAGE: &str = include_str!("../fixtures/page.html");

/// Response size of `/huge`, above the default fetch limit.
pub const HUGE_BODY_BYTES: usize = 9 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixturePage {
    pub slug: String,
    pub html: String,
    pub stylesheets: usize,
    pub scripts: usize,
}

const TOPICS: &[&str] = &[
    "Bus timetables",
    "Council tax",
    "Recycling collections",
    "School admissions",
    "Parking permits",
    "Library services",
    "Planning applications",
    "Leisure centres",
    "Housing repairs",
    "Adult education",
    "Road works",
    "Voter registration",
    "Parks and gardens",
    "Health visitors",
    "Museum exhibitions",
    "Blue badge scheme",
    "Allotments",
    "Street lighting",
    "Community grants",
    "Emergency contacts",
];

const WORDS: &[&str] = &[
    "residents", "can", "apply", "online", "or", "visit", "the", "office", "during", "opening",
    "hours", "forms", "are", "available", "in", "large", "print", "and", "audio", "formats",
    "please", "bring", "proof", "of", "address", "staff", "will", "help", "you", "complete",
    "each", "step", "before", "your", "appointment", "ends", "café", "naïve", "résumé", "über",
];

fn sentence(seed: usize, len: usize) -> String {
    let words: Vec<&str> = (0..len)
        .map(|k| WORDS[(seed * 7 + k * 13 + k * k) % WORDS.len()])
        .collect();
    let mut s = words.join(" ");
    if let Some(first) = s.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    s.push('.');
    s
}

fn page(i: usize) -> FixturePage {
    let n = i + 1;
    let title = TOPICS[i];
    let next = n % CORPUS_SIZE + 1;
    let prev = (n + CORPUS_SIZE - 2) % CORPUS_SIZE + 1;
    let mut head = String::new();
    let mut stylesheets = 2;
    let mut scripts = 1;

    if n % 4 == 1 {
        head.push_str("<base href=\"/pages/\">\n");
    }
    head.push_str(&format!("<title>{title}</title>\n"));
    head.push_str("<link rel=\"stylesheet\" href=\"/assets/site.css\">\n");
    head.push_str(&format!(
        "<link rel=\"stylesheet\" type=\"text/css\" href=\"../assets/theme-{n}.css\" media=\"screen\">\n"
    ));
    if n % 3 == 0 {
        head.push_str("<link rel=\"alternate STYLESHEET\" title=\"print\" href=\"/assets/print.css\">\n");
        stylesheets += 1;
    }
    head.push_str(&format!(
        "<style>\n  body {{ font-family: serif; color: #{c}{c}{c}; }}\n  h1 {{ font-size: {}px; }}\n</style>\n",
        10 + n,
        c = n % 10
    ));
    head.push_str("<script src=\"/assets/app.js\"></script>\n");
    if n % 2 == 0 {
        head.push_str(&format!("<script async src=\"/assets/analytics-{n}.js\"></script>\n"));
        scripts += 1;
    }
    head.push_str(&format!("<script>var pageNumber = {n};</script>\n"));

    let mut body = String::new();
    body.push_str(&format!(
        "<center><h1 style=\"color: red\" id=\"top\">{title}</h1></center>\n"
    ));
    body.push_str(&format!(
        "<p style=\"font-size: 10px; color: #aaa\" align=\"justify\">{} Some <font color=\"red\" size=\"2\">highlighted</font> words sit beside <b>bold</b> and <i>italic</i> text. Caf&eacute; &amp; &lt;tags&gt; stay&nbsp;readable.</p>\n",
        sentence(n, 12)
    ));
    body.push_str(&format!(
        "<table border=\"1\" cellpadding=\"4\" width=\"600\" bgcolor=\"#eeeeee\">\n<tr><th align=\"left\">Item</th><th>Detail</th></tr>\n<tr><td valign=\"top\" width=\"40%\">Reference</td><td nowrap>{title} {n}</td></tr>\n</table>\n"
    ));
    body.push_str("<ul>\n");
    body.push_str(&format!("<li><a href=\"page-{next}.html\">Next page</a></li>\n"));
    body.push_str(&format!(
        "<li><a href=\"/pages/page-{prev}.html?from={n}&amp;ref=nav\">Previous page</a></li>\n"
    ));
    body.push_str(&format!(
        "<li><a href=\"http://example.org/articles/{n}?q=a b&amp;lang=en\">External article</a></li>\n"
    ));
    body.push_str("<li><a href=\"https://example.com/search?q=low+vision#results\">Search</a></li>\n");
    body.push_str("<li><a href=\"//cdn.example.net/docs/guide.html\">Guide</a></li>\n");
    body.push_str(&format!("<li><a href=\"#section-{n}\">Jump to section</a></li>\n"));
    body.push_str("<li><a href=\"mailto:help@example.org?subject=Help\">Mail us</a></li>\n");
    body.push_str("<li><a href=\"tel:+441234567890\">Call us</a></li>\n");
    body.push_str("<li><a href=\"javascript:void(0)\" onclick=\"toggle()\">Toggle menu</a></li>\n");
    body.push_str(&format!(
        "<li><a href=\"../pages/page-{n}.html#top\" style=\"font-weight: bold\">This page</a></li>\n"
    ));
    if n % 5 == 0 {
        body.push_str("<li><a href=\"data:text/html,hello\">Inline data</a></li>\n");
        body.push_str("<li><a href=\"  /pages/page-1.html\n\">Padded link</a></li>\n");
    }
    body.push_str("</ul>\n");
    body.push_str(&format!(
        "<img src=\"images/photo-{n}.png\" srcset=\"images/photo-{n}.png 1x, images/photo-{n}@2x.png 2x\" alt=\"Photo {n}\" width=\"320\" height=\"240\" border=\"0\" align=\"right\">\n"
    ));
    body.push_str(&format!(
        "<div id=\"section-{n}\" style=\"margin: 0 auto\"><marquee>Breaking news</marquee> for {title}.</div>\n"
    ));
    for k in 0..(2 + n % 3) {
        body.push_str(&format!(
            "<p><big>Note</big> {}</p>\n",
            sentence(n * 5 + k, 8 + (n + k) % 9)
        ));
    }
    body.push_str("<script>\n  document.title += \"!\";\n</script>\n");

    let doctype = if n % 5 == 0 { "" } else { "<!DOCTYPE html>\n" };
    let html = format!(
        "{doctype}<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n{head}</head>\n<body bgcolor=\"#ffffcc\" text=\"#333333\" link=\"#ff0000\" onload=\"init()\">\n{body}</body>\n</html>\n"
    );
    FixturePage {
        slug: format!("page-{n}"),
        html,
        stylesheets,
        scripts,
    }
}

/// The twenty synthetic pages, served at `/pages/{slug}.html`.
pub fn corpus() -> &'static [FixturePage] {
    static CORPUS: OnceLock<Vec<FixturePage>> = OnceLock::new();
    CORPUS.get_or_init(|| (0..CORPUS_SIZE).map(page).collect())
}

struct OriginState {
    latency: Duration,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    requests: AtomicUsize,
}

/// A local HTTP server for the corpus and for fetcher edge cases.
///
/// | path | response |
/// |---|---|
/// | `/pages/{slug}.html` | a corpus page |
/// | `/standalone.html` | [`STANDALONE_PAGE`] |
/// | `/assets/{file}` | CSS or JavaScript |
/// | `/redirect/{n}` | a chain of `n` redirects ending at `page-1` |
/// | `/redirect-loop` | redirects to itself |
/// | `/redirect-to-file` | redirects to a `file:` URL |
/// | `/stall` | never answers |
/// | `/image.png` | a PNG |
/// | `/huge` | [`HUGE_BODY_BYTES`] of HTML |
/// | `/status/{code}` | that status |
/// | `/latin1.html` | ISO-8859-1 declared in the header |
/// | `/meta-charset.html` | windows-1252 declared in a meta element |
/// | `/no-type` | HTML without a content type |
///
/// Every response is delayed by the configured latency. The server stops
/// when the value is dropped.
pub struct FixtureOrigin {
    addr: SocketAddr,
    state: Arc<OriginState>,
    task: JoinHandle<()>,
}

impl FixtureOrigin {
    /// Starts with 5 ms of latency per response.
    pub async fn start() -> std::io::Result<Self> {
        Self::start_with_latency(Duration::from_millis(5)).await
    }

    pub async fn start_with_latency(latency: Duration) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0").await?;
        let addr = listener.local_addr()?;
        let state = Arc::new(OriginState {
            latency,
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
            requests: AtomicUsize::new(0),
        });
        let app = router(state.clone());
        let task = tokio::spawn(async move {
            let _ = axum::serve(listener, app).await;
        });
        Ok(FixtureOrigin { addr, state, task })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://127.0.0.1:{port}`
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn url(&self, path: &str) -> SourceUrl {
        SourceUrl::parse(&format!("{}{path}", self.base_url())).expect("fixture URL")
    }

    pub fn page_url(&self, slug: &str) -> SourceUrl {
        self.url(&format!("/pages/{slug}.html"))
    }

    pub fn page_urls(&self) -> Vec<SourceUrl> {
        corpus().iter().map(|p| self.page_url(&p.slug)).collect()
    }

    /// The corpus as a batch manifest: two pages per label, B1 to B10.
    pub fn manifest(&self) -> Vec<LabeledUrl> {
        corpus()
            .iter()
            .enumerate()
            .map(|(i, p)| LabeledUrl::new(format!("B{}", i / 2 + 1), self.page_url(&p.slug).to_string()))
            .collect()
    }

    pub fn requests(&self) -> usize {
        self.state.requests.load(Ordering::SeqCst)
    }

    /// Highest number of requests handled at once so far.
    pub fn max_in_flight(&self) -> usize {
        self.state.max_in_flight.load(Ordering::SeqCst)
    }
}

impl Drop for FixtureOrigin {
    fn drop(&mut self) {
        self.task.abort();
    }
}

fn router(state: Arc<OriginState>) -> Router {
    Router::new()
        .route("/pages/{file}", get(corpus_page))
        .route("/standalone.html", get(|| async { html(STANDALONE_PAGE) }))
        .route("/assets/{file}", get(asset))
        .route("/redirect/{n}", get(redirect_chain))
        .route("/redirect-loop", get(|| async { redirect("/redirect-loop") }))
        .route("/redirect-to-file", get(|| async { redirect("file:///etc/passwd") }))
        .route("/stall", get(stall))
        .route("/image.png", get(png))
        .route("/huge", get(huge))
        .route("/status/{code}", get(status))
        .route("/latin1.html", get(latin1))
        .route("/meta-charset.html", get(meta_charset))
        .route("/no-type", get(no_type))
        .layer(middleware::from_fn_with_state(state.clone(), track))
        .with_state(state)
}

async fn track(State(state): State<Arc<OriginState>>, req: Request, next: Next) -> Response {
    state.requests.fetch_add(1, Ordering::SeqCst);
    let now = state.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    state.max_in_flight.fetch_max(now, Ordering::SeqCst);
    tokio::time::sleep(state.latency).await;
    let resp = next.run(req).await;
    state.in_flight.fetch_sub(1, Ordering::SeqCst);
    resp
}

fn html(body: impl Into<Body>) -> Response {
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], body.into()).into_response()
}

fn redirect(location: &str) -> Response {
    (StatusCode::FOUND, [(header::LOCATION, location.to_string())]).into_response()
}

async fn corpus_page(Path(file): Path<String>) -> Response {
    let slug = file.strip_suffix(".html").unwrap_or(&file);
    match corpus().iter().find(|p| p.slug == slug) {
        Some(p) => html(p.html.clone()),
        None => (StatusCode::NOT_FOUND, "no such page").into_response(),
    }
}

async fn asset(Path(file): Path<String>) -> Response {
    let (content_type, body) = if file.ends_with(".css") {
        (
            "text/css",
            format!("/* {file} */\nbody {{ font-size: 12px; color: #666; }}\n").repeat(40),
        )
    } else {
        (
            "application/javascript",
            format!("// {file}\nconsole.log({:?});\n", file).repeat(40),
        )
    };
    ([(header::CONTENT_TYPE, content_type)], body).into_response()
}

async fn redirect_chain(Path(n): Path<u32>) -> Response {
    if n <= 1 {
        redirect("/pages/page-1.html")
    } else {
        redirect(&format!("/redirect/{}", n - 1))
    }
}

async fn stall() -> Response {
    tokio::time::sleep(Duration::from_secs(3600)).await;
    html("too late")
}

async fn png() -> Response {
    const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";
    ([(header::CONTENT_TYPE, "image/png")], PNG_SIGNATURE).into_response()
}

async fn huge() -> Response {
    let mut body = b"<!DOCTYPE html><p>".to_vec();
    body.resize(HUGE_BODY_BYTES, b'a');
    html(body)
}

async fn status(Path(code): Path<u16>) -> Response {
    let code = StatusCode::from_u16(code).unwrap_or(StatusCode::BAD_REQUEST);
    let mut resp = html(format!("<p>status {}</p>", code.as_u16()));
    *resp.status_mut() = code;
    resp
}

async fn latin1() -> Response {
    let body = b"<!DOCTYPE html><title>Men\xfa</title><p>Caf\xe9 cr\xe8me br\xfbl\xe9e</p>".to_vec();
    ([(header::CONTENT_TYPE, "text/html; charset=ISO-8859-1")], body).into_response()
}

async fn meta_charset() -> Response {
    let body =
        b"<!DOCTYPE html><meta charset=\"windows-1252\"><p>\x93Quoted\x94 \x80 price</p>".to_vec();
    ([(header::CONTENT_TYPE, "text/html")], body).into_response()
}

async fn no_type() -> Response {
    Response::new(Body::from("<p>untyped</p>"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::html::parse_str;

    #[test]
    fn corpus_pages_carry_every_component_kind() {
        assert_eq!(corpus().len(), CORPUS_SIZE);
        for p in corpus() {
            let doc = parse_str(&p.html, SourceUrl::parse("http://o.test/pages/x.html").unwrap());
            let sheets = doc
                .elements_by_tag("link")
                .into_iter()
                .filter(|&id| {
                    doc.element(id)
                        .and_then(|e| e.attr("rel"))
                        .is_some_and(|r| r.to_ascii_lowercase().contains("stylesheet"))
                })
                .count();
            let external_scripts = doc
                .elements_by_tag("script")
                .into_iter()
                .filter(|&id| doc.element(id).is_some_and(|e| e.has_attr("src")))
                .count();
            assert_eq!(sheets, p.stylesheets, "{}", p.slug);
            assert_eq!(external_scripts, p.scripts, "{}", p.slug);
            assert!(sheets >= 2 && external_scripts >= 1);
            assert!(p.html.contains("style=\"") && p.html.contains("<font"));
        }
    }
}
