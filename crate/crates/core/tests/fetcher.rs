use std::time::{Duration, Instant};

use clearlens::eval::measure_load;
use clearlens::fetcher::{FetchError, FetchOptions, Fetcher, SourceUrl, UrlError};
use clearlens::fixtures::{corpus, FixtureOrigin};
use clearlens::html::{parse_html, text_content};
use clearlens::pipeline::TransformConfig;
use clearlens::style::PresetCatalog;

fn fetcher(tweak: impl FnOnce(&mut FetchOptions)) -> Fetcher {
    let mut opts = FetchOptions::default();
    tweak(&mut opts);
    Fetcher::new(opts).unwrap()
}

#[tokio::test]
async fn follows_redirect_chain() {
    let origin = FixtureOrigin::start().await.unwrap();
    let page = fetcher(|_| {}).fetch(&origin.url("/redirect/3")).await.unwrap();
    assert_eq!(page.final_url, origin.page_url("page-1"));
    assert_eq!(page.requested_url, origin.url("/redirect/3"));
    assert_eq!(page.status, 200);
    assert!(page.fetch_duration >= Duration::from_millis(5 * 4));
}

#[tokio::test]
async fn redirect_limits() {
    let origin = FixtureOrigin::start().await.unwrap();
    let f = fetcher(|o| o.max_redirects = 2);
    assert!(f.fetch(&origin.url("/redirect/2")).await.is_ok());
    assert!(matches!(
        f.fetch(&origin.url("/redirect/3")).await,
        Err(FetchError::TooManyRedirects { max: 2, .. })
    ));
    assert!(matches!(
        fetcher(|_| {}).fetch(&origin.url("/redirect-loop")).await,
        Err(FetchError::TooManyRedirects { max: 10, .. })
    ));
}

#[tokio::test]
async fn never_follows_redirects_off_the_web() {
    let origin = FixtureOrigin::start().await.unwrap();
    let err = fetcher(|_| {})
        .fetch(&origin.url("/redirect-to-file"))
        .await
        .unwrap_err();
    assert!(matches!(err, FetchError::BadRedirect { ref location, .. } if location == "file:///etc/passwd"), "{err}");
}

#[tokio::test]
async fn stalled_origin_times_out() {
    let origin = FixtureOrigin::start().await.unwrap();
    let start = Instant::now();
    let err = fetcher(|o| o.timeout_ms = 200)
        .fetch(&origin.url("/stall"))
        .await
        .unwrap_err();
    assert!(matches!(err, FetchError::Timeout { after_ms: 200, .. }), "{err}");
    assert!(start.elapsed() < Duration::from_secs(2));
}

#[tokio::test]
async fn rejects_non_html_and_error_statuses() {
    let origin = FixtureOrigin::start().await.unwrap();
    let f = fetcher(|_| {});
    assert!(matches!(
        f.fetch(&origin.url("/image.png")).await,
        Err(FetchError::NotHtml { ref content_type, .. }) if content_type == "image/png"
    ));
    assert!(matches!(f.fetch(&origin.url("/no-type")).await, Err(FetchError::NotHtml { .. })));
    for code in [404, 500, 503] {
        let err = f.fetch(&origin.url(&format!("/status/{code}"))).await.unwrap_err();
        assert!(matches!(err, FetchError::HttpError { status, .. } if status == code), "{err}");
    }
    assert!(matches!(
        f.fetch(&origin.url("/pages/nope.html")).await,
        Err(FetchError::HttpError { status: 404, .. })
    ));
}

#[tokio::test]
async fn body_limit() {
    let origin = FixtureOrigin::start().await.unwrap();
    assert!(matches!(
        fetcher(|_| {}).fetch(&origin.url("/huge")).await,
        Err(FetchError::BodyTooLarge { limit, .. }) if limit == 8 * 1024 * 1024
    ));
    assert!(matches!(
        fetcher(|o| o.max_body_bytes = 1000).fetch(&origin.page_url("page-1")).await,
        Err(FetchError::BodyTooLarge { limit: 1000, .. })
    ));
}

#[tokio::test]
async fn unreachable_host_is_a_network_error() {
    let origin = FixtureOrigin::start().await.unwrap();
    let url = origin.url("/pages/page-1.html");
    drop(origin);
    tokio::time::sleep(Duration::from_millis(20)).await;
    let err = fetcher(|o| o.timeout_ms = 2000).fetch(&url).await.unwrap_err();
    assert!(matches!(err, FetchError::Network { .. }), "{err}");
}

#[tokio::test]
async fn decodes_declared_charsets() {
    let origin = FixtureOrigin::start().await.unwrap();
    let f = fetcher(|_| {});

    let page = f.fetch(&origin.url("/latin1.html")).await.unwrap();
    assert_eq!(page.charset, "windows-1252");
    let doc = parse_html(&page.body, &page.charset, page.final_url.clone()).unwrap();
    assert_eq!(text_content(&doc), ["menú", "café", "crème", "brûlée"]);

    let page = f.fetch(&origin.url("/meta-charset.html")).await.unwrap();
    assert_eq!(page.charset, "windows-1252");
    let doc = parse_html(&page.body, &page.charset, page.final_url.clone()).unwrap();
    assert_eq!(text_content(&doc), ["\u{201c}quoted\u{201d}", "€", "price"]);

    let page = f.fetch(&origin.page_url("page-3")).await.unwrap();
    assert_eq!(page.charset, "UTF-8");
}

#[test]
fn only_web_schemes_parse() {
    for (input, scheme) in [("file:///etc/passwd", "file"), ("javascript:alert(1)", "javascript"), ("ftp://h/x", "ftp")] {
        assert_eq!(
            SourceUrl::parse(input),
            Err(UrlError::UnsupportedScheme {
                scheme: scheme.into()
            })
        );
    }
    assert_eq!(SourceUrl::parse("example.com/a").unwrap().as_str(), "http://example.com/a");
}

#[tokio::test]
async fn load_model_counts_every_subresource() {
    let origin = FixtureOrigin::start().await.unwrap();
    let f = fetcher(|_| {});
    let cfg = TransformConfig::new(
        PresetCatalog::builtin().get("default").unwrap().clone(),
        "http://127.0.0.1:1",
        FetchOptions::default(),
    )
    .unwrap();
    for p in corpus().iter().take(4) {
        let before = origin.requests();
        let m = measure_load(&f, &origin.page_url(&p.slug), &cfg).await.unwrap();
        assert_eq!(m.subresources, p.stylesheets + p.scripts, "{}", p.slug);
        assert_eq!(origin.requests() - before, 1 + m.subresources);
        assert!(m.wlt_ms < m.nlt_ms, "{}: {m:?}", p.slug);
        assert_eq!(m.conversion_rate, 100.0);
    }

    let standalone = measure_load(&f, &origin.url("/standalone.html"), &cfg).await;
    assert!(standalone.is_ok(), "remote subresources fail without failing the page");
}
