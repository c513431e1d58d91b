use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kuchikiki::NodeRef;
use mrweb_core::html::{extract_resources, insert_links, replace_images, simplify_html, GeometryDump, HtmlDocument};
use mrweb_core::resource::{BoundingBox, ResourceKind};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus() -> Vec<(String, String)> {
    let mut docs: Vec<(String, String)> = std::fs::read_dir(fixtures().join("html"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    docs.sort();
    docs
}

fn tag(node: &NodeRef) -> Option<String> {
    node.as_element().map(|e| e.name.local.to_string())
}

/// Independent statement of which subtrees the simplifier may drop.
fn dropped(node: &NodeRef) -> bool {
    let Some(el) = node.as_element() else { return false };
    let attrs = el.attributes.borrow();
    let style = attrs.get("style").unwrap_or("").to_ascii_lowercase().replace(' ', "");
    matches!(&*el.name.local, "script" | "noscript" | "meta" | "link" | "base")
        || attrs.contains("hidden")
        || style.contains("display:none")
        || style.contains("visibility:hidden")
}

fn visible_chars(root: &NodeRef) -> BTreeMap<char, usize> {
    let mut counts = BTreeMap::new();
    for node in root.descendants() {
        let Some(text) = node.as_text() else { continue };
        if node.ancestors().any(|a| dropped(&a)) {
            continue;
        }
        for c in text.borrow().chars().filter(|c| !c.is_whitespace()) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

#[test]
fn corpus_is_large_enough() {
    assert!(corpus().len() >= 20);
}

#[test]
fn simplifier_properties_hold_on_corpus() {
    for (name, src) in corpus() {
        let original = HtmlDocument::parse(&src);
        let before_nodes = original.node_count();
        let before_text = visible_chars(original.root());

        let once = simplify_html(HtmlDocument::parse(&src));
        let first = once.to_html();
        assert!(once.node_count() <= before_nodes, "{name}: node count grew");
        let second = simplify_html(HtmlDocument::parse(&first)).to_html();
        assert_eq!(first, second, "{name}: not idempotent");

        let reparsed = HtmlDocument::parse(&first);
        let comments = reparsed.root().descendants().filter(|n| n.as_comment().is_some()).count();
        let scripts = reparsed
            .root()
            .descendants()
            .filter(|n| tag(n).is_some_and(|t| t == "script" || t == "noscript"))
            .count();
        assert_eq!((comments, scripts), (0, 0), "{name}");
        assert_eq!(visible_chars(reparsed.root()), before_text, "{name}: visible text changed");
    }
}

/// Walks two trees in lockstep, ignoring the named attribute on the named tag.
fn same_shape(a: &NodeRef, b: &NodeRef, skip: &dyn Fn(&str, &str) -> bool) -> Result<(), String> {
    let (ca, cb): (Vec<_>, Vec<_>) = (a.children().collect(), b.children().collect());
    if ca.len() != cb.len() {
        return Err(format!("child count {} vs {}", ca.len(), cb.len()));
    }
    for (x, y) in ca.iter().zip(&cb) {
        match (x.as_element(), y.as_element()) {
            (Some(ex), Some(ey)) => {
                if ex.name != ey.name {
                    return Err(format!("tag {:?} vs {:?}", ex.name.local, ey.name.local));
                }
                let strip = |e: &kuchikiki::ElementData| {
                    e.attributes
                        .borrow()
                        .map
                        .iter()
                        .filter(|(k, _)| !skip(&e.name.local, &k.local))
                        .map(|(k, v)| (k.local.to_string(), v.value.clone()))
                        .collect::<Vec<_>>()
                };
                if strip(ex) != strip(ey) {
                    return Err(format!("attributes differ on {}", ex.name.local));
                }
            }
            (None, None) => {
                let text = |n: &NodeRef| {
                    n.as_text()
                        .map(|t| t.borrow().clone())
                        .or_else(|| n.as_comment().map(|t| t.borrow().clone()))
                };
                if text(x) != text(y) {
                    return Err("text differs".into());
                }
            }
            _ => return Err("node kinds differ".into()),
        }
        same_shape(x, y, skip)?;
    }
    Ok(())
}

fn hrefs(doc: &HtmlDocument) -> Vec<String> {
    doc.root()
        .descendants()
        .filter(|n| tag(n).as_deref() == Some("a"))
        .filter_map(|n| n.as_element().unwrap().attributes.borrow().get("href").map(str::to_string))
        .collect()
}

#[test]
fn link_insertion_touches_only_hrefs() {
    let pool: Vec<String> = (0..7).map(|i| format!("https://pool.test/page/{i}")).collect();
    for (name, src) in corpus() {
        let original = HtmlDocument::parse(&src);
        let out = insert_links(HtmlDocument::parse(&src), &pool, 42).unwrap();
        same_shape(original.root(), out.root(), &|t, a| t == "a" && a == "href").map_err(|e| format!("{name}: {e}")).unwrap();
        assert!(hrefs(&out).iter().all(|h| pool.contains(h)), "{name}");
    }
}

#[test]
fn link_insertion_is_seed_deterministic() {
    let anchors: String = (0..10).map(|i| format!("<a href=\"/o{i}\">l{i}</a>")).collect();
    let src = format!("<html><body>{anchors}</body></html>");
    let pool: Vec<String> = (0..5).map(|i| format!("https://p.test/{i}")).collect();
    let run = |seed| insert_links(HtmlDocument::parse(&src), &pool, seed).unwrap().to_html();
    assert_eq!(run(42), run(42));
    assert_ne!(run(42), run(43));
    assert_eq!(hrefs(&HtmlDocument::parse(&run(42))).len(), 10);
}

#[test]
fn image_replacement_touches_only_image_urls() {
    let map: Vec<String> = (0..50).map(|i| format!("/static/{i}.png")).collect();
    for (name, src) in corpus() {
        let original = HtmlDocument::parse(&src);
        let out = replace_images(HtmlDocument::parse(&src), &map, 3).unwrap();
        same_shape(original.root(), out.document.root(), &|t, a| (t == "img" && a == "src") || a == "style")
            .map_err(|e| format!("{name}: {e}"))
            .unwrap();
        let used: Vec<&String> = out.assignments.iter().map(|(_, n)| n).collect();
        let mut unique = used.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), used.len(), "{name}: reused image");
        assert!(out.warnings.is_empty());
    }
}

#[test]
fn sample_dump_extracts_four_entries() {
    let text = std::fs::read_to_string(fixtures().join("geometry/sample_dump.json")).unwrap();
    let dump = GeometryDump::from_json(&text).unwrap();
    assert_eq!(dump.elements.len(), 7);
    let list = extract_resources(&dump, &["/api"]).unwrap();
    assert!(list.validate().is_empty());
    assert_eq!(list.origin, "https://shop.example.com/index.html");
    assert_eq!((list.width, list.height), (800.0, 600.0));
    let got: Vec<(BoundingBox, ResourceKind, &str, Option<&str>)> = list
        .entries
        .iter()
        .map(|e| (e.position, e.kind, e.url.as_str(), e.text.as_deref()))
        .collect();
    assert_eq!(
        got,
        vec![
            (BoundingBox::new(10.0, 10.0, 70.0, 30.0), ResourceKind::InternalLink, "https://shop.example.com/about", Some("About us")),
            (BoundingBox::new(600.0, 500.0, 780.0, 540.0), ResourceKind::BackendRoute, "https://shop.example.com/api/subscribe", Some("Subscribe")),
            (BoundingBox::new(0.0, 40.0, 200.0, 140.0), ResourceKind::Image, "https://shop.example.com/img/logo.png", None),
            (BoundingBox::new(0.0, 150.0, 800.0, 450.0), ResourceKind::BackgroundImage, "https://shop.example.com/img/hero.jpg", None),
        ]
    );
}
